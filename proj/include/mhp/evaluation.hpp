// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhp/channel_model.hpp"
#include "mhp/linalg.hpp"

namespace mhp {

enum class Problem { QoS, MMF };
enum class PrecoderKind { FD, Hybrid, HybridQuantized };
enum class Metric { MinSinr, RatioToFd, TotalPowerWatts };

const char* to_string(Problem p);
const char* to_string(PrecoderKind k);
const char* to_string(Metric m);
Problem parse_problem(const std::string& s);
PrecoderKind parse_precoder_kind(const std::string& s);
Metric parse_metric(const std::string& s);

/// min over all UEs of their SINR.
double min_sinr(const ChannelSet& channels, const CMatrix& weights, double noise_power);

/// Squared Frobenius norm.
double total_power(const CMatrix& weights);

/// Performance of `value` relative to the FD baseline: value/fd for min SINR,
/// fd/value for power (lower power is better). Empty when the baseline is
/// not positive.
std::optional<double> performance_ratio(double value, double fd_value, Metric metric);

/// One CSV row.
struct ResultRecord {
    std::string experiment_id;
    std::uint64_t seed = 0;
    int N = 0;
    int G = 0;
    int total_K = 0;
    int L = 0;
    std::optional<int> bits;  ///< empty = infinite resolution
    Problem problem = Problem::MMF;
    PrecoderKind precoder_kind = PrecoderKind::FD;
    Metric metric = Metric::MinSinr;
    double value = 0.0;
    bool infeasible = false;
};

/// Mean of the feasible values of one (experiment, N, problem, kind, bits,
/// metric) cell across realizations.
struct AggregateRow {
    std::string experiment_id;
    int N = 0;
    Problem problem = Problem::MMF;
    PrecoderKind precoder_kind = PrecoderKind::FD;
    std::optional<int> bits;
    Metric metric = Metric::MinSinr;
    int count = 0;
    int infeasible_count = 0;
    double mean = 0.0;
};

/// Rows come out sorted by (experiment, N, kind, bits, metric).
std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records);

/// Quantized-vs-FD summary for one (experiment, N, kind, bits):
/// ratio_of_means = mean(metric of kind) / mean(metric of FD) for min SINR
/// (inverted for power), mean_of_ratios = mean of the ratio_to_fd records.
struct RatioRow {
    std::string experiment_id;
    int N = 0;
    PrecoderKind precoder_kind = PrecoderKind::Hybrid;
    std::optional<int> bits;
    Metric base_metric = Metric::MinSinr;
    double ratio_of_means = 0.0;
    double mean_of_ratios = 0.0;
    int count = 0;
};

std::vector<RatioRow> performance_table(const std::vector<ResultRecord>& records);

} // namespace mhp
