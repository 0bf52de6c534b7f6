// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mhp/channel_model.hpp"
#include "mhp/execution.hpp"
#include "mhp/sdp.hpp"

namespace mhp {

/// Fully-digital precoder: N x G, column j serves group j.
struct FdPrecoder {
    CMatrix weights;

    int n_antennas() const { return static_cast<int>(weights.rows()); }
    int groups() const { return static_cast<int>(weights.cols()); }
    /// sum_j ||w_j||^2
    double power() const { return weights.squaredNorm(); }
};

/// Per-UE SINR targets, indexed [group][ue].
using SinrTargets = std::vector<std::vector<double>>;

SinrTargets uniform_targets(const SystemConfig& config, double gamma);

/// |h_jk^H w_j|^2 / (sum_{i != j} |h_jk^H w_i|^2 + noise)
double sinr(const ChannelSet& channels, const CMatrix& weights, int j, int k, double noise_power);

// ---------------------------------------------------------------------------
// Semidefinite relaxation

/// Real-embedded QoS relaxation. Variables are one 2N x 2N block per group
/// (the image of X_j) and one slack per UE constraint:
///   minimize sum_j tr(X_j)
///   s.t.     h^H X_j h - gamma_jk sum_{i != j} h^H X_i h - s_jk = gamma_jk * noise.
/// Constraint rows are ordered group-major then UE.
struct QosSdr {
    SdpProblem problem;
    int n_antennas = 0;
    int groups = 0;
};

QosSdr build_qos_sdr(const ChannelSet& channels, const SinrTargets& targets, double noise_power);

/// QoS constraints at a common target gamma plus the budget row
/// sum_j tr(X_j) + t = P (t >= 0 is the last slack). Infeasible when no
/// relaxed design reaches gamma within the budget.
QosSdr build_mmf_feasibility_sdr(const ChannelSet& channels, double gamma, double power_budget,
                                 double noise_power);

/// Bounded, always-feasible form of the budget test used by the MMF
/// bisection:
///   maximize tau
///   s.t.     h^H X_j h - gamma sum_{i != j} h^H X_i h >= gamma * noise * tau,
///            sum_j tr(X_j) <= P,  tau >= 0.
/// gamma is reachable within the budget iff tau* >= 1. Slack layout: one per
/// UE, then tau, then the budget slack.
QosSdr build_mmf_margin_sdr(const ChannelSet& channels, double gamma, double power_budget,
                            double noise_power);

struct SdrSolution {
    std::vector<CMatrix> X;  ///< Hermitian PSD, one per group
    double objective = 0.0;  ///< sum_j tr(X_j)
    SdpStatus status = SdpStatus::MaxIterations;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    RVector slacks;  ///< nonnegative variables in problem order
};

SdrSolution solve_qos_sdr(const QosSdr& sdr, const SdpSettings& settings = {});

// ---------------------------------------------------------------------------
// Power control

/// gains[j](k, i) = |h_jk^H d_i|^2 for unit-norm group directions d_i.
struct GainTable {
    std::vector<RMatrix> gains;

    int groups() const { return static_cast<int>(gains.size()); }
    double at(int j, int k, int i) const { return gains[j](k, i); }
};

GainTable compute_gains(const ChannelSet& channels, const CMatrix& directions);

struct PowerAllocation {
    RVector p;
    bool converged = false;

    double total() const { return p.sum(); }
};

/// Least fixed point of p_j <- max_k gamma_jk (sum_{i!=j} p_i g_ijk + noise) / g_jjk.
/// Each iterate is polished by solving the linear system of the current
/// active UEs; the polish is accepted only if it is itself a fixed point.
/// Divergence (sum p > 1e6 * sum(gamma*noise)/min g, or 500 iterations)
/// returns converged = false.
PowerAllocation power_control_qos(const GainTable& gains, const SinrTargets& targets,
                                  double noise_power);

struct MmfPowerResult {
    PowerAllocation allocation;
    double gamma = 0.0;  ///< min SINR reached by `allocation`
};

/// Bisection on a common SINR target over power_control_qos with sum p <= P,
/// bracket [0, min_jk P g_jjk / noise], stopped at relative width 1e-4; the
/// result is then lifted to the balanced allocation that spends exactly P.
MmfPowerResult power_control_mmf(const GainTable& gains, double power_budget, double noise_power);

// ---------------------------------------------------------------------------
// Randomization

/// Unit-norm principal eigenvector of every X_j as the columns of an N x G
/// matrix. A zero X_j yields e_1.
CMatrix principal_directions(std::span<const CMatrix> X);

/// n_rand samples; sample s holds, as an N x G matrix, the normalized
/// X_j^{1/2} u with u ~ CN(0, I). Square roots use the Hermitian
/// eigendecomposition with negative eigenvalues clipped. Draw order: sample,
/// then group, then antenna. A zero X_j yields e_1.
std::vector<CMatrix> gaussian_randomize(std::span<const CMatrix> X, int n_rand,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Full designs

struct DesignOptions {
    int n_rand = 100;
    std::uint64_t seed = 0;
    SdpSettings sdp{};
    Execution execution = Execution::Serial;
};

struct QosDesign {
    FdPrecoder precoder;
    double sdr_objective = 0.0;  ///< relaxation lower bound on the power; NaN if unconverged
    SdpStatus sdr_status = SdpStatus::MaxIterations;
    int chosen_candidate = 0;    ///< 0 = principal eigenvectors, s >= 1 = Gaussian sample s
};

/// Minimum-power precoder meeting every target. Candidates are the principal
/// eigenvectors plus n_rand Gaussian samples, each fed through QoS power
/// control; the cheapest converged candidate wins (lowest index on ties).
/// Throws InfeasibleError when the relaxation is infeasible or no candidate
/// admits a power allocation.
QosDesign solve_qos(const ChannelSet& channels, const SinrTargets& targets, double noise_power,
                    const DesignOptions& options = {});

struct MmfDesign {
    FdPrecoder precoder;
    double achieved_min_sinr = 0.0;
    double sdr_upper_bound = 0.0;  ///< infeasible end of the relaxation bisection
    int chosen_candidate = 0;
};

/// Max-min fair precoder under sum power P. Bisection on a common target
/// gamma, bracket [0, min_jk P ||h_jk||^2 / noise], relative width 1e-4; a
/// step is feasible when the margin relaxation (build_mmf_margin_sdr) reaches
/// tau* >= 1. Steps are first tried at a coarse tolerance and re-solved at
/// the configured one when the status or margin is inconclusive. The last
/// feasible relaxation then feeds randomization and MMF power control.
MmfDesign solve_mmf(const ChannelSet& channels, double power_budget, double noise_power,
                    const DesignOptions& options = {});

} // namespace mhp
