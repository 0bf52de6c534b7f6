// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mhp/evaluation.hpp"
#include "mhp/execution.hpp"
#include "mhp/hybrid.hpp"

namespace mhp {

/// Declarative Monte Carlo campaign.
///
/// File syntax: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. Keys: name, problem (QoS|MMF), N (list), G, K (list of
/// G sizes, or one size shared by all groups), L, power, sinr_target,
/// bits (list of integers and/or inf), n_realizations, n_rand, base_seed,
/// family (primary|alternate), rho_mode (per-group|uniform), spacing, noise.
/// name, problem, N, G and K are required.
struct ExperimentSpec {
    std::string name;
    Problem problem = Problem::MMF;
    std::vector<int> n_list;
    int groups = 1;
    std::vector<int> group_sizes;
    int n_paths = 3;
    double power_budget = 10.0;
    double sinr_target = 128.0;
    std::vector<std::optional<int>> bits_list{std::nullopt};
    int n_realizations = 100;
    int n_rand = 100;
    std::uint64_t base_seed = 0;
    PhaseFamily family = PhaseFamily::Primary;
    RhoMode rho_mode = RhoMode::PerGroup;
    double spacing_ratio = 0.5;
    double noise_power = 1.0;

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
    SystemConfig system(int n_antennas) const;
};

ExperimentSpec parse_experiment_spec(std::istream& is, const std::string& source = "<stream>");
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Channel seed of realization r at antenna count N:
/// base_seed XOR mix_seed(N, r), mix_seed being the SplitMix64 fold.
std::uint64_t realization_seed(std::uint64_t base_seed, int n_antennas, int realization);
/// Seed of the Gaussian randomization stream for a realization.
std::uint64_t randomization_seed(std::uint64_t channel_seed);

struct RealizationOutcome {
    std::vector<ResultRecord> records;
    std::uint64_t seed = 0;
    bool fd_infeasible = false;
    int n_rf = 0;  ///< RF chains of the infinite-resolution decomposition
    FdPrecoder fd;
    HybridPrecoder hybrid;
};

/// Solves the FD design for one realization, decomposes it once and
/// evaluates every resolution in bits_list on that decomposition.
/// Quantized hybrids keep their analog directions and have the per-group
/// digital gains re-allocated by the problem's power control (QoS targets or
/// the MMF budget). Never throws on infeasibility; affected records are
/// flagged instead.
RealizationOutcome run_realization(const ExperimentSpec& spec, int n_antennas, int realization);

/// All realizations of all N, merged in emit order. Parallel execution fans
/// realizations out to worker threads; the result is identical to Serial.
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec,
                                         Execution execution = Execution::Parallel);

inline constexpr const char* kCsvHeader =
    "experiment_id,seed,N,G,total_K,L,bits,problem,precoder_kind,metric_name,value,infeasible";

/// Sorts by (N, seed, precoder_kind, bits, metric_name); bits "inf" sorts last.
void sort_records(std::vector<ResultRecord>& records);

/// Header plus one row per record (after sorting). Values use 12 significant
/// digits; infeasible is 0/1; NaN prints as "nan".
void write_csv(std::ostream& os, std::vector<ResultRecord> records);
void emit_csv(const std::vector<ResultRecord>& records, const std::filesystem::path& path);
std::vector<ResultRecord> read_csv(std::istream& is, const std::string& source = "<stream>");
std::vector<ResultRecord> load_csv(const std::filesystem::path& path);

/// Aggregate and performance tables as CSV sections.
void write_report(std::ostream& os, const std::vector<ResultRecord>& records);

} // namespace mhp
