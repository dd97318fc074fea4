#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "equiflow/instance.hpp"

namespace equiflow {

enum class Layout { HE, LE, LEU, HEU, SW };
enum class OracleKind { EasyMCFP, EasyWE, RandomMCFP, RandomWE };

Layout parse_layout(const std::string& s);
OracleKind parse_oracle(const std::string& s);
std::string to_string(Layout l);
std::string to_string(OracleKind o);

struct ScenarioSpec {
    Layout layout = Layout::LE;
    OracleKind oracle = OracleKind::EasyWE;
    int agents = 30;   // total planned trips (morning + evening); must be even
    int size = 6;      // grid side length, |V| ~ size^2
    int time_steps = 1;
    double epoch_duration = 180.0;
    std::uint64_t seed = 0;
    int n_train = 9;
    int n_val = 5;
    int n_test = 6;

    int num_instances() const { return n_train + n_val + n_test; }
};

// Jittered grid with seeded diagonal shortcuts; strongly connected by
// construction, |A| ~ 4 |V|, uniform attributes.
RoadNetwork generate_network(std::uint64_t seed, int size);

// Plain grid, no jitter or shortcuts (LEU / HEU environments).
RoadNetwork grid_network(int size);

// Layout-specific home/work vertex sampling.
std::pair<std::vector<int>, std::vector<int>> place_locations(const RoadNetwork& net, Layout layout,
                                                              int n_homes, int n_works,
                                                              std::uint64_t seed);

// One home->work trip at epoch 0 and one work->home trip at epoch T/2 per
// (home, work) pair, demand 1 each.
std::vector<Commodity> make_commodities(const std::vector<int>& homes, const std::vector<int>& works,
                                        int time_steps);

Instance make_instance(const ScenarioSpec& spec, std::uint64_t instance_seed);

// Ground-truth flow in report space. WE oracles are solved to an absolute
// equilibrium gap of at most 1e-4 * total demand.
std::vector<double> oracle_target(const Instance& inst, OracleKind oracle, std::uint64_t seed);

struct Dataset {
    ScenarioSpec spec;
    std::vector<Instance> instances;
    std::vector<std::vector<double>> targets;  // report space
    std::vector<int> train_idx, val_idx, test_idx;
};

// Generates instances + oracle targets and writes instance_XXX.json,
// target_XXX.csv and manifest.json under out_dir. Returns the dataset.
Dataset build_dataset(const ScenarioSpec& spec, const std::string& out_dir, int threads = 1);

// Reads a dataset directory written by build_dataset.
Dataset load_dataset(const std::string& dir);

}  // namespace equiflow
