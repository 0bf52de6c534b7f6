// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mhp/execution.hpp"
#include "mhp/fd_design.hpp"
#include "mhp/linalg.hpp"

namespace mhp {

/// Which of the two closed-form phase pairs solves
/// rho (e^{i phi_a} + e^{i phi_b}) = alpha e^{i theta}.
///   Primary:   phi_a = theta + acos(alpha / 2rho), phi_b = theta - acos(...)
///   Alternate: signs swapped.
enum class PhaseFamily { Primary, Alternate };

/// PerGroup: rho_j = max_n |W_nj| / 2. Uniform: one rho = max_nj |W_nj| / 2
/// for every group (a single digital multiplier).
enum class RhoMode { PerGroup, Uniform };

const char* to_string(PhaseFamily f);
const char* to_string(RhoMode m);
PhaseFamily parse_phase_family(const std::string& s);
RhoMode parse_rho_mode(const std::string& s);

/// Phase-shifter resolution. Empty `bits` means infinite resolution.
struct QuantizationConfig {
    std::optional<int> bits;

    static QuantizationConfig infinite() { return {}; }
    static QuantizationConfig with_bits(int b);
    bool is_infinite() const { return !bits.has_value(); }
};

/// Analog network of two phase-shifter banks feeding n_rf RF chains, plus the
/// digital stage. Analog column r is a_r + b_r with [a_r]_n = e^{i phases_a(n,r)}
/// and [b_r]_n = e^{i phases_b(n,r)}; the implemented precoder is
/// W_RF * digital. Phases live in [0, 2*pi).
struct HybridPrecoder {
    RMatrix phases_a;  ///< N x n_rf
    RMatrix phases_b;  ///< N x n_rf
    CMatrix digital;   ///< n_rf x G
    int n_rf = 0;
    PhaseFamily family = PhaseFamily::Primary;
    QuantizationConfig quantization{};

    int n_antennas() const { return static_cast<int>(phases_a.rows()); }
    int groups() const { return static_cast<int>(digital.cols()); }
    /// Two shifters per antenna per RF chain.
    int phase_shifter_count() const { return 2 * n_antennas() * n_rf; }
    /// N x n_rf analog matrix.
    CMatrix analog() const;
};

/// rho per column of W (see RhoMode). A zero column yields 0 in PerGroup mode.
std::vector<double> digital_gains(const CMatrix& weights, RhoMode mode = RhoMode::PerGroup);

struct PhasePair {
    double a;
    double b;
};

/// Raw (unwrapped) phase pair for one entry alpha e^{i theta} at gain rho.
/// Throws std::invalid_argument if rho <= 0 and InfeasibleError if
/// alpha > 2 rho (1 + 1e-12).
PhasePair phase_solution(double alpha, double theta, double rho, PhaseFamily family);

/// Number of singular values above max(N, G) * eps * sigma_max.
int numerical_rank(const CMatrix& weights);

struct DecomposeOptions {
    PhaseFamily family = PhaseFamily::Primary;
    RhoMode rho_mode = RhoMode::PerGroup;
    Execution execution = Execution::Serial;
};

/// Exact hybrid factorization with n_rf = min(rank, G) RF chains. Full column
/// rank takes the diagonal path (digital = diag(rho)); otherwise the
/// rank-deficient path.
HybridPrecoder decompose(const CMatrix& weights, const DecomposeOptions& options = {});

/// W = A B with A = U_r Sigma_r (N x r) and B = V_r^H (r x G) from the SVD;
/// A is decomposed on the diagonal path and the digital stage becomes
/// diag(rho) B. A zero matrix is handled as r = 1 with a zero digital stage.
HybridPrecoder decompose_rank_deficient(const CMatrix& weights,
                                        const DecomposeOptions& options = {});

/// Snaps every phase to the nearest point of {2 pi k / 2^b} (circular
/// distance). Infinite resolution returns the input unchanged.
HybridPrecoder quantize_phases(const HybridPrecoder& hybrid, const QuantizationConfig& q);

/// W_RF * digital.
CMatrix reconstruct(const HybridPrecoder& hybrid, Execution execution = Execution::Serial);

/// Per-entry phase computation over an N x G matrix, shared by both
/// execution paths. Outputs are wrapped into [0, 2*pi).
void solve_phase_matrix(const CMatrix& weights, const std::vector<double>& rho,
                        PhaseFamily family, RMatrix& phases_a, RMatrix& phases_b,
                        Execution execution);

} // namespace mhp
