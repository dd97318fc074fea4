#pragma once

#include <string>
#include <vector>

#include "equiflow/instance.hpp"
#include "equiflow/scenarios.hpp"

namespace equiflow::io {

// One JSON document per instance: vertices, arcs with all attributes,
// commodities (with departure epochs), home/work vertex ids, time grid.
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

// Flows as CSV, shortest round-trip doubles. Static: `arc_id,flow`;
// time-variant: `arc_id,epoch,flow` (report-space layout [a*T + t]).
void save_flow_csv(const std::vector<double>& flow, int num_arcs, int time_steps,
                   const std::string& path);
std::vector<double> load_flow_csv(const std::string& path, int num_arcs, int time_steps);

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset_dir(const std::string& dir);

std::string instance_filename(int index);
std::string target_filename(int index);

}  // namespace equiflow::io
