#include "equiflow/features.hpp"

#include <cmath>

#include "equiflow/common.hpp"

namespace equiflow {

namespace {
const int kAreaFactors[] = {1, 2, 5, 10, 15};
constexpr double kHighCapacity = 1000.0;
constexpr double kEps = 1e-8;
}  // namespace

std::vector<std::string> feature_names(const FeatureConfig& cfg) {
    std::vector<std::string> names;
    const char* counted[] = {"homes", "works", "nodes", "arcs", "arcs_cap_gt_1000"};
    for (const char* what : counted)
        for (int f : kAreaFactors) names.push_back(std::string("n_") + what + "_r" + std::to_string(f));
    names.insert(names.end(), {"length", "free_speed", "capacity", "lanes", "transit_time",
                               "out_deg_tail", "in_deg_tail", "out_deg_head", "in_deg_head"});
    if (cfg.time_features)
        names.insert(names.end(),
                     {"dist_morning_rush_s", "dist_morning_rush_s2", "dist_morning_rush_s3",
                      "remaining_time_s", "simulation_time_s", "dist_evening_rush_s",
                      "dist_evening_rush_s2", "dist_evening_rush_s3"});
    if (cfg.capacity_index) names.push_back("capacity_index");
    return names;
}

FeatureMatrix base_arc_features(const Instance& inst) {
    const RoadNetwork& net = inst.net;
    const int na = net.num_arcs();

    // Max pairwise vertex distance sets the neighborhood radii.
    double maxdist = 0.0;
    for (int u = 0; u < net.num_vertices(); ++u)
        for (int v = u + 1; v < net.num_vertices(); ++v) {
            const double d = std::hypot(net.vertices[u].x - net.vertices[v].x,
                                        net.vertices[u].y - net.vertices[v].y);
            maxdist = std::max(maxdist, d);
        }

    std::vector<std::pair<double, double>> arc_mid(na);
    for (int a = 0; a < na; ++a) {
        const Arc& arc = net.arcs[a];
        arc_mid[a] = {0.5 * (net.vertices[arc.tail].x + net.vertices[arc.head].x),
                      0.5 * (net.vertices[arc.tail].y + net.vertices[arc.head].y)};
    }

    FeatureMatrix mat;
    mat.rows = na;
    mat.cols = static_cast<int>(feature_names({}).size());
    mat.data.assign(static_cast<std::size_t>(mat.rows) * mat.cols, 0.0);

    for (int a = 0; a < na; ++a) {
        double* row = mat.row(a);
        int col = 0;
        const auto [mx, my] = arc_mid[a];
        auto within = [&](double x, double y, double r) { return std::hypot(x - mx, y - my) <= r; };
        for (int f : kAreaFactors) {
            const double r = maxdist / f;
            int count = 0;
            for (int h : inst.homes)
                if (within(net.vertices[h].x, net.vertices[h].y, r)) ++count;
            row[col++] = count;
        }
        for (int f : kAreaFactors) {
            const double r = maxdist / f;
            int count = 0;
            for (int w : inst.works)
                if (within(net.vertices[w].x, net.vertices[w].y, r)) ++count;
            row[col++] = count;
        }
        for (int f : kAreaFactors) {
            const double r = maxdist / f;
            int count = 0;
            for (const Vertex& v : net.vertices)
                if (within(v.x, v.y, r)) ++count;
            row[col++] = count;
        }
        for (int f : kAreaFactors) {
            const double r = maxdist / f;
            int count = 0;
            for (int b = 0; b < na; ++b)
                if (within(arc_mid[b].first, arc_mid[b].second, r)) ++count;
            row[col++] = count;
        }
        for (int f : kAreaFactors) {
            const double r = maxdist / f;
            int count = 0;
            for (int b = 0; b < na; ++b)
                if (net.arcs[b].capacity > kHighCapacity &&
                    within(arc_mid[b].first, arc_mid[b].second, r))
                    ++count;
            row[col++] = count;
        }
        const Arc& arc = net.arcs[a];
        row[col++] = arc.length;
        row[col++] = arc.free_speed;
        row[col++] = arc.capacity;
        row[col++] = arc.lanes;
        row[col++] = arc.transit_time;
        row[col++] = static_cast<double>(net.out_arcs[arc.tail].size());
        row[col++] = static_cast<double>(net.in_arcs[arc.tail].size());
        row[col++] = static_cast<double>(net.out_arcs[arc.head].size());
        row[col++] = static_cast<double>(net.in_arcs[arc.head].size());
    }
    return mat;
}

void append_time_features(std::vector<double>& row, const TimeContext& ctx) {
    const double sim_time = ctx.epoch * ctx.epoch_duration;
    const double morning = std::abs(ctx.epoch - ctx.morning_epoch) * ctx.epoch_duration;
    const double evening = std::abs(ctx.epoch - ctx.evening_epoch) * ctx.epoch_duration;
    const double remaining = (ctx.total_epochs - 1 - ctx.epoch) * ctx.epoch_duration;
    row.push_back(morning);
    row.push_back(morning * morning);
    row.push_back(morning * morning * morning);
    row.push_back(remaining);
    row.push_back(sim_time);
    row.push_back(evening);
    row.push_back(evening * evening);
    row.push_back(evening * evening * evening);
}

FeatureStats fit_feature_stats(const std::vector<FeatureMatrix>& mats) {
    if (mats.empty()) throw DataError("cannot fit feature statistics on an empty set");
    const int d = mats.front().cols;
    FeatureStats st;
    st.mean.assign(d, 0.0);
    st.stddev.assign(d, 0.0);
    std::size_t n = 0;
    for (const FeatureMatrix& m : mats) {
        if (m.cols != d) throw DataError("feature matrices disagree on dimension");
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < d; ++c) st.mean[c] += m.row(r)[c];
        n += m.rows;
    }
    for (double& v : st.mean) v /= static_cast<double>(n);
    for (const FeatureMatrix& m : mats)
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < d; ++c) {
                const double dlt = m.row(r)[c] - st.mean[c];
                st.stddev[c] += dlt * dlt;
            }
    for (double& v : st.stddev) v = std::sqrt(v / static_cast<double>(n));
    return st;
}

void standardize(FeatureMatrix& mat, const FeatureStats& stats, const FeatureConfig& cfg) {
    if (static_cast<int>(stats.mean.size()) != mat.cols)
        throw DataError("feature statistics do not match the matrix dimension");
    for (int r = 0; r < mat.rows; ++r) {
        double* row = mat.row(r);
        for (int c = 0; c < mat.cols; ++c) {
            if (cfg.zscore) {
                const double sd = stats.stddev[c] > kEps ? stats.stddev[c] : 1.0;
                row[c] = (row[c] - stats.mean[c]) / sd;
            } else {
                const double mn = std::abs(stats.mean[c]) > kEps ? stats.mean[c] : 1.0;
                row[c] = row[c] / mn;
            }
        }
    }
}

}  // namespace equiflow
