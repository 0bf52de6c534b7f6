// SPDX-License-Identifier: Apache-2.0
#include "mhp/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "mhp/errors.hpp"
#include "mhp/fd_design.hpp"

namespace mhp {

const char* to_string(Problem p) { return p == Problem::QoS ? "QoS" : "MMF"; }

const char* to_string(PrecoderKind k) {
    switch (k) {
    case PrecoderKind::FD: return "FD";
    case PrecoderKind::Hybrid: return "Hybrid";
    case PrecoderKind::HybridQuantized: return "HybridQuantized";
    }
    return "?";
}

const char* to_string(Metric m) {
    switch (m) {
    case Metric::MinSinr: return "min_sinr";
    case Metric::RatioToFd: return "ratio_to_fd";
    case Metric::TotalPowerWatts: return "total_power_watts";
    }
    return "?";
}

Problem parse_problem(const std::string& s) {
    if (s == "QoS" || s == "qos") return Problem::QoS;
    if (s == "MMF" || s == "mmf") return Problem::MMF;
    throw std::invalid_argument("unknown problem '" + s + "' (expected QoS|MMF)");
}

PrecoderKind parse_precoder_kind(const std::string& s) {
    if (s == "FD") return PrecoderKind::FD;
    if (s == "Hybrid") return PrecoderKind::Hybrid;
    if (s == "HybridQuantized") return PrecoderKind::HybridQuantized;
    throw std::invalid_argument("unknown precoder kind '" + s + "'");
}

Metric parse_metric(const std::string& s) {
    if (s == "min_sinr") return Metric::MinSinr;
    if (s == "ratio_to_fd") return Metric::RatioToFd;
    if (s == "total_power_watts") return Metric::TotalPowerWatts;
    throw std::invalid_argument("unknown metric '" + s + "'");
}

double min_sinr(const ChannelSet& channels, const CMatrix& weights, double noise_power) {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < channels.groups(); ++j)
        for (int k = 0; k < channels.group_size(j); ++k)
            worst = std::min(worst, sinr(channels, weights, j, k, noise_power));
    return worst;
}

double total_power(const CMatrix& weights) { return weights.squaredNorm(); }

std::optional<double> performance_ratio(double value, double fd_value, Metric metric) {
    if (!(fd_value > 0.0)) return std::nullopt;
    if (metric == Metric::TotalPowerWatts) {
        if (!(value > 0.0)) return std::nullopt;
        return fd_value / value;
    }
    return value / fd_value;
}

namespace {

int bits_key(const std::optional<int>& bits) {
    return bits ? *bits : std::numeric_limits<int>::max();
}

} // namespace

std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records) {
    using Key = std::tuple<std::string, int, int, int, int, int>;
    std::map<Key, AggregateRow> cells;
    std::map<Key, double> sums;
    for (const auto& r : records) {
        const Key key{r.experiment_id, r.N, static_cast<int>(r.precoder_kind), bits_key(r.bits),
                      static_cast<int>(r.metric), static_cast<int>(r.problem)};
        auto [it, fresh] = cells.try_emplace(key);
        if (fresh) {
            it->second.experiment_id = r.experiment_id;
            it->second.N = r.N;
            it->second.problem = r.problem;
            it->second.precoder_kind = r.precoder_kind;
            it->second.bits = r.bits;
            it->second.metric = r.metric;
        }
        if (r.infeasible) {
            ++it->second.infeasible_count;
        } else {
            ++it->second.count;
            sums[key] += r.value;
        }
    }
    std::vector<AggregateRow> out;
    out.reserve(cells.size());
    for (auto& [key, row] : cells) {
        row.mean = row.count > 0 ? sums[key] / row.count : std::numeric_limits<double>::quiet_NaN();
        out.push_back(row);
    }
    return out;
}

std::vector<RatioRow> performance_table(const std::vector<ResultRecord>& records) {
    const std::vector<AggregateRow> cells = aggregate(records);
    using Cell = std::tuple<std::string, int, int, int, int>;  // id, N, kind, bits, metric
    std::map<Cell, const AggregateRow*> index;
    for (const auto& c : cells)
        index[{c.experiment_id, c.N, static_cast<int>(c.precoder_kind), bits_key(c.bits),
               static_cast<int>(c.metric)}] = &c;

    std::vector<RatioRow> out;
    for (const auto& c : cells) {
        if (c.precoder_kind == PrecoderKind::FD || c.metric != Metric::RatioToFd) continue;
        const Metric base =
            c.problem == Problem::MMF ? Metric::MinSinr : Metric::TotalPowerWatts;
        const auto fd = index.find({c.experiment_id, c.N, static_cast<int>(PrecoderKind::FD),
                                    bits_key(std::nullopt), static_cast<int>(base)});
        const auto mine = index.find({c.experiment_id, c.N, static_cast<int>(c.precoder_kind),
                                      bits_key(c.bits), static_cast<int>(base)});
        if (fd == index.end() || mine == index.end()) continue;
        RatioRow row;
        row.experiment_id = c.experiment_id;
        row.N = c.N;
        row.precoder_kind = c.precoder_kind;
        row.bits = c.bits;
        row.base_metric = base;
        row.mean_of_ratios = c.mean;
        row.count = c.count;
        row.ratio_of_means = performance_ratio(mine->second->mean, fd->second->mean, base)
                                 .value_or(std::numeric_limits<double>::quiet_NaN());
        out.push_back(row);
    }
    return out;
}

} // namespace mhp
