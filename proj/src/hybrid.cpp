// SPDX-License-Identifier: Apache-2.0
#include "mhp/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mhp/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhp {

namespace {

constexpr double kFeasibilitySlack = 1e-12;

/// Degenerate gains (all-zero column) are replaced by 1 so the column is
/// realized by two opposed shifters.
std::vector<double> usable_gains(const CMatrix& weights, RhoMode mode) {
    std::vector<double> rho = digital_gains(weights, mode);
    for (double& r : rho)
        if (!(r > 0.0)) r = 1.0;
    return rho;
}

HybridPrecoder diagonal_path(const CMatrix& weights, const DecomposeOptions& options) {
    const std::vector<double> rho = usable_gains(weights, options.rho_mode);
    HybridPrecoder h;
    h.n_rf = static_cast<int>(weights.cols());
    h.family = options.family;
    solve_phase_matrix(weights, rho, options.family, h.phases_a, h.phases_b, options.execution);
    h.digital = CMatrix::Zero(h.n_rf, h.n_rf);
    for (int j = 0; j < h.n_rf; ++j) h.digital(j, j) = rho[j];
    return h;
}

} // namespace

const char* to_string(PhaseFamily f) {
    return f == PhaseFamily::Primary ? "primary" : "alternate";
}

const char* to_string(RhoMode m) {
    return m == RhoMode::PerGroup ? "per-group" : "uniform";
}

PhaseFamily parse_phase_family(const std::string& s) {
    if (s == "primary") return PhaseFamily::Primary;
    if (s == "alternate") return PhaseFamily::Alternate;
    throw std::invalid_argument("unknown phase family '" + s + "' (expected primary|alternate)");
}

RhoMode parse_rho_mode(const std::string& s) {
    if (s == "per-group") return RhoMode::PerGroup;
    if (s == "uniform") return RhoMode::Uniform;
    throw std::invalid_argument("unknown rho mode '" + s + "' (expected per-group|uniform)");
}

QuantizationConfig QuantizationConfig::with_bits(int b) {
    if (b < 1) throw std::invalid_argument("phase-shifter resolution needs at least 1 bit");
    if (b > 52) throw std::invalid_argument("phase-shifter resolution above 52 bits is meaningless");
    return QuantizationConfig{b};
}

CMatrix HybridPrecoder::analog() const {
    CMatrix rf(phases_a.rows(), phases_a.cols());
    for (Eigen::Index r = 0; r < rf.cols(); ++r)
        for (Eigen::Index n = 0; n < rf.rows(); ++n)
            rf(n, r) = std::polar(1.0, phases_a(n, r)) + std::polar(1.0, phases_b(n, r));
    return rf;
}

std::vector<double> digital_gains(const CMatrix& weights, RhoMode mode) {
    std::vector<double> rho(weights.cols(), 0.0);
    for (Eigen::Index j = 0; j < weights.cols(); ++j)
        rho[j] = 0.5 * (weights.rows() > 0 ? weights.col(j).cwiseAbs().maxCoeff() : 0.0);
    if (mode == RhoMode::Uniform && !rho.empty()) {
        const double shared = *std::max_element(rho.begin(), rho.end());
        std::fill(rho.begin(), rho.end(), shared);
    }
    return rho;
}

PhasePair phase_solution(double alpha, double theta, double rho, PhaseFamily family) {
    if (!(rho > 0.0)) throw std::invalid_argument("digital gain rho must be > 0");
    double ratio = alpha / (2.0 * rho);
    if (ratio > 1.0 + kFeasibilitySlack)
        throw InfeasibleError("entry magnitude " + std::to_string(alpha) + " exceeds 2*rho = " +
                              std::to_string(2.0 * rho));
    ratio = std::clamp(ratio, 0.0, 1.0);
    const double spread = std::acos(ratio);
    if (family == PhaseFamily::Primary) return {theta + spread, theta - spread};
    return {theta - spread, theta + spread};
}

void solve_phase_matrix(const CMatrix& weights, const std::vector<double>& rho,
                        PhaseFamily family, RMatrix& phases_a, RMatrix& phases_b,
                        Execution execution) {
    const Eigen::Index N = weights.rows();
    const Eigen::Index G = weights.cols();
    phases_a.resize(N, G);
    phases_b.resize(N, G);
    std::vector<char> zero_column(G, 0);
    for (Eigen::Index j = 0; j < G; ++j) zero_column[j] = weights.col(j).isZero(0.0) ? 1 : 0;

    auto entry = [&](Eigen::Index n, Eigen::Index j) {
        if (zero_column[j]) {
            phases_a(n, j) = 0.0;
            phases_b(n, j) = kPi;
            return;
        }
        const cdouble w = weights(n, j);
        const double alpha = std::abs(w);
        const double theta = alpha > 0.0 ? std::arg(w) : 0.0;
        const PhasePair p = phase_solution(alpha, theta, rho[j], family);
        phases_a(n, j) = wrap_phase(p.a);
        phases_b(n, j) = wrap_phase(p.b);
    };

    const long total = static_cast<long>(N * G);
#ifdef _OPENMP
    if (execution == Execution::Parallel) {
        // Exceptions must not cross the parallel region.
        bool infeasible = false;
#pragma omp parallel for schedule(static) num_threads(worker_count()) reduction(|| : infeasible)
        for (long idx = 0; idx < total; ++idx) {
            try {
                entry(idx % N, idx / N);
            } catch (const InfeasibleError&) {
                infeasible = true;
            }
        }
        if (infeasible) throw InfeasibleError("an entry exceeds twice its digital gain");
        return;
    }
#else
    (void)execution;
#endif
    for (long idx = 0; idx < total; ++idx) entry(idx % N, idx / N);
}

int numerical_rank(const CMatrix& weights) {
    if (weights.size() == 0) return 0;
    const Eigen::JacobiSVD<CMatrix> svd(weights);
    const RVector& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv[0] > 0.0)) return 0;
    const double tol = static_cast<double>(std::max(weights.rows(), weights.cols())) *
                       std::numeric_limits<double>::epsilon() * sv[0];
    return static_cast<int>((sv.array() > tol).count());
}

HybridPrecoder decompose(const CMatrix& weights, const DecomposeOptions& options) {
    const int rank = numerical_rank(weights);
    if (rank < weights.cols()) return decompose_rank_deficient(weights, options);
    return diagonal_path(weights, options);
}

HybridPrecoder decompose_rank_deficient(const CMatrix& weights, const DecomposeOptions& options) {
    const Eigen::Index N = weights.rows();
    const Eigen::Index G = weights.cols();
    const int rank = numerical_rank(weights);

    CMatrix left, right;
    if (rank == 0) {
        left = CMatrix::Zero(N, 1);
        right = CMatrix::Zero(1, G);
    } else {
        const Eigen::JacobiSVD<CMatrix> svd(weights, Eigen::ComputeThinU | Eigen::ComputeThinV);
        left = svd.matrixU().leftCols(rank) * svd.singularValues().head(rank).asDiagonal();
        right = svd.matrixV().leftCols(rank).adjoint();
    }
    HybridPrecoder h = diagonal_path(left, options);
    h.digital = (h.digital * right).eval();
    return h;
}

HybridPrecoder quantize_phases(const HybridPrecoder& hybrid, const QuantizationConfig& q) {
    HybridPrecoder out = hybrid;
    out.quantization = q;
    if (q.is_infinite()) return out;
    const long long levels = 1LL << *q.bits;
    const double step = kTwoPi / static_cast<double>(levels);
    auto snap = [&](double phi) {
        long long k = std::llround(wrap_phase(phi) / step) % levels;
        return static_cast<double>(k) * step;
    };
    out.phases_a = hybrid.phases_a.unaryExpr(snap);
    out.phases_b = hybrid.phases_b.unaryExpr(snap);
    return out;
}

CMatrix reconstruct(const HybridPrecoder& hybrid, Execution execution) {
    const CMatrix rf = hybrid.analog();
    const Eigen::Index N = rf.rows();
    const Eigen::Index R = rf.cols();
    const Eigen::Index G = hybrid.digital.cols();
    if (hybrid.digital.rows() != R)
        throw DimensionError("digital stage has " + std::to_string(hybrid.digital.rows()) +
                             " rows but the analog network has " + std::to_string(R) + " RF chains");
    CMatrix out(N, G);
    auto entry = [&](Eigen::Index n, Eigen::Index j) {
        cdouble acc = 0.0;
        for (Eigen::Index r = 0; r < R; ++r) acc += rf(n, r) * hybrid.digital(r, j);
        out(n, j) = acc;
    };
    const long total = static_cast<long>(N * G);
#ifdef _OPENMP
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
        for (long idx = 0; idx < total; ++idx) entry(idx % N, idx / N);
        return out;
    }
#else
    (void)execution;
#endif
    for (long idx = 0; idx < total; ++idx) entry(idx % N, idx / N);
    return out;
}

} // namespace mhp
