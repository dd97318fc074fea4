#include "equiflow/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "equiflow/common.hpp"

namespace equiflow::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kInstanceFormat = 1;
constexpr int kManifestFormat = 1;

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string instance_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "instance_%03d.json", index);
    return buf;
}

std::string target_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "target_%03d.csv", index);
    return buf;
}

void save_instance(const Instance& inst, const std::string& path) {
    json j;
    j["format_version"] = kInstanceFormat;
    j["time_steps"] = inst.time_steps;
    j["epoch_duration"] = inst.epoch_duration;
    json verts = json::array();
    for (const Vertex& v : inst.net.vertices)
        verts.push_back({{"id", v.id}, {"x", v.x}, {"y", v.y}});
    j["vertices"] = std::move(verts);
    json arcs = json::array();
    for (const Arc& a : inst.net.arcs)
        arcs.push_back({{"id", a.id},
                        {"tail", a.tail},
                        {"head", a.head},
                        {"length", a.length},
                        {"free_speed", a.free_speed},
                        {"capacity", a.capacity},
                        {"lanes", a.lanes},
                        {"transit_time", a.transit_time}});
    j["arcs"] = std::move(arcs);
    json comms = json::array();
    for (const Commodity& c : inst.commodities)
        comms.push_back({{"origin", c.origin},
                         {"destination", c.destination},
                         {"demand", c.demand},
                         {"departure_epoch", c.departure_epoch}});
    j["commodities"] = std::move(comms);
    j["homes"] = inst.homes;
    j["works"] = inst.works;
    write_file(path, j.dump(2) + "\n");
}

Instance load_instance(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed instance JSON " + path + ": " + e.what());
    }
    try {
        Instance inst;
        inst.time_steps = j.value("time_steps", 1);
        inst.epoch_duration = j.value("epoch_duration", 180.0);
        for (const auto& v : j.at("vertices")) {
            Vertex vert;
            vert.id = v.at("id").get<int>();
            vert.x = v.at("x").get<double>();
            vert.y = v.at("y").get<double>();
            inst.net.vertices.push_back(vert);
        }
        for (const auto& a : j.at("arcs")) {
            Arc arc;
            arc.id = a.at("id");
            arc.tail = a.at("tail");
            arc.head = a.at("head");
            arc.length = a.at("length");
            arc.free_speed = a.at("free_speed");
            arc.capacity = a.at("capacity");
            arc.lanes = a.at("lanes");
            arc.transit_time = a.at("transit_time");
            inst.net.arcs.push_back(arc);
        }
        inst.net.finalize();
        for (const auto& c : j.at("commodities")) {
            Commodity com;
            com.origin = c.at("origin");
            com.destination = c.at("destination");
            com.demand = c.at("demand");
            com.departure_epoch = c.value("departure_epoch", 0);
            inst.commodities.push_back(com);
        }
        validate_commodities(inst.net, inst.commodities);
        inst.homes = j.value("homes", std::vector<int>{});
        inst.works = j.value("works", std::vector<int>{});
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("instance JSON " + path + " missing fields: " + e.what());
    }
}

void save_flow_csv(const std::vector<double>& flow, int num_arcs, int time_steps,
                   const std::string& path) {
    if (static_cast<int>(flow.size()) != num_arcs * time_steps)
        throw DataError("flow vector does not match arcs x epochs");
    std::ostringstream out;
    if (time_steps <= 1) {
        out << "arc_id,flow\n";
        for (int a = 0; a < num_arcs; ++a) out << a << ',' << fmt_double(flow[a]) << '\n';
    } else {
        out << "arc_id,epoch,flow\n";
        for (int a = 0; a < num_arcs; ++a)
            for (int t = 0; t < time_steps; ++t)
                out << a << ',' << t << ','
                    << fmt_double(flow[static_cast<std::size_t>(a) * time_steps + t]) << '\n';
    }
    write_file(path, out.str());
}

std::vector<double> load_flow_csv(const std::string& path, int num_arcs, int time_steps) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty flow CSV " + path);
    std::vector<double> flow(static_cast<std::size_t>(num_arcs) * std::max(1, time_steps), 0.0);
    const bool timed = time_steps > 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const int a = std::stoi(tok);
        int t = 0;
        if (timed) {
            std::getline(ss, tok, ',');
            t = std::stoi(tok);
        }
        std::getline(ss, tok, ',');
        if (a < 0 || a >= num_arcs || t < 0 || t >= std::max(1, time_steps))
            throw DataError("flow CSV row out of range in " + path);
        flow[static_cast<std::size_t>(a) * std::max(1, time_steps) + t] = std::stod(tok);
    }
    return flow;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        save_instance(ds.instances[i], (fs::path(dir) / instance_filename(static_cast<int>(i))).string());
        save_flow_csv(ds.targets[i], ds.instances[i].net.num_arcs(), ds.instances[i].time_steps,
                      (fs::path(dir) / target_filename(static_cast<int>(i))).string());
    }
    json j;
    j["format_version"] = kManifestFormat;
    j["spec"] = {{"layout", to_string(ds.spec.layout)},
                 {"oracle", to_string(ds.spec.oracle)},
                 {"agents", ds.spec.agents},
                 {"size", ds.spec.size},
                 {"time_steps", ds.spec.time_steps},
                 {"epoch_duration", ds.spec.epoch_duration},
                 {"seed", ds.spec.seed},
                 {"n_train", ds.spec.n_train},
                 {"n_val", ds.spec.n_val},
                 {"n_test", ds.spec.n_test}};
    j["split"] = {{"train", ds.train_idx}, {"val", ds.val_idx}, {"test", ds.test_idx}};
    json files = json::array();
    for (std::size_t i = 0; i < ds.instances.size(); ++i)
        files.push_back({{"instance", instance_filename(static_cast<int>(i))},
                         {"target", target_filename(static_cast<int>(i))}});
    j["files"] = std::move(files);
    write_file((fs::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

Dataset load_dataset_dir(const std::string& dir) {
    json j;
    const std::string mpath = (fs::path(dir) / "manifest.json").string();
    try {
        j = json::parse(read_file(mpath));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + mpath + ": " + e.what());
    }
    Dataset ds;
    try {
        const auto& s = j.at("spec");
        ds.spec.layout = parse_layout(s.at("layout"));
        ds.spec.oracle = parse_oracle(s.at("oracle"));
        ds.spec.agents = s.at("agents");
        ds.spec.size = s.at("size");
        ds.spec.time_steps = s.at("time_steps");
        ds.spec.epoch_duration = s.at("epoch_duration");
        ds.spec.seed = s.at("seed");
        ds.spec.n_train = s.at("n_train");
        ds.spec.n_val = s.at("n_val");
        ds.spec.n_test = s.at("n_test");
        ds.train_idx = j.at("split").at("train").get<std::vector<int>>();
        ds.val_idx = j.at("split").at("val").get<std::vector<int>>();
        ds.test_idx = j.at("split").at("test").get<std::vector<int>>();
        for (const auto& f : j.at("files")) {
            Instance inst = load_instance((fs::path(dir) / f.at("instance").get<std::string>()).string());
            std::vector<double> tgt =
                load_flow_csv((fs::path(dir) / f.at("target").get<std::string>()).string(),
                              inst.net.num_arcs(), inst.time_steps);
            ds.instances.push_back(std::move(inst));
            ds.targets.push_back(std::move(tgt));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + mpath + " missing fields: " + e.what());
    }
    return ds;
}

}  // namespace equiflow::io
