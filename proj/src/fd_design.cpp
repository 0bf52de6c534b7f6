// SPDX-License-Identifier: Apache-2.0
#include "mhp/fd_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mhp/errors.hpp"
#include "mhp/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhp {

namespace {

void check_dims(const ChannelSet& channels, const CMatrix& weights) {
    if (weights.rows() != channels.n_antennas() || weights.cols() != channels.groups())
        throw DimensionError("precoder is " + std::to_string(weights.rows()) + "x" +
                             std::to_string(weights.cols()) + " but channels need " +
                             std::to_string(channels.n_antennas()) + "x" +
                             std::to_string(channels.groups()));
}

void check_targets(const ChannelSet& channels, const SinrTargets& targets) {
    if (static_cast<int>(targets.size()) != channels.groups())
        throw DimensionError("SINR targets must have one list per group");
    for (int j = 0; j < channels.groups(); ++j)
        if (static_cast<int>(targets[j].size()) != channels.group_size(j))
            throw DimensionError("SINR targets for group " + std::to_string(j) +
                                 " do not match its UE count");
}

double sinr_from_gains(const GainTable& g, const RVector& p, int j, int k, double noise) {
    double interference = noise;
    for (int i = 0; i < g.groups(); ++i)
        if (i != j) interference += p[i] * g.at(j, k, i);
    return p[j] * g.at(j, k, j) / interference;
}

double min_sinr_from_gains(const GainTable& g, const RVector& p, double noise) {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.groups(); ++j)
        for (Eigen::Index k = 0; k < g.gains[j].rows(); ++k)
            worst = std::min(worst, sinr_from_gains(g, p, j, static_cast<int>(k), noise));
    return worst;
}

/// One application of the standard interference function; `active` receives
/// the maximizing UE per group.
RVector interference_step(const GainTable& g, const SinrTargets& targets, const RVector& p,
                          double noise, std::vector<int>& active) {
    const int G = g.groups();
    RVector next(G);
    active.assign(G, 0);
    for (int j = 0; j < G; ++j) {
        double best = -1.0;
        for (Eigen::Index k = 0; k < g.gains[j].rows(); ++k) {
            double interference = noise;
            for (int i = 0; i < G; ++i)
                if (i != j) interference += p[i] * g.at(j, static_cast<int>(k), i);
            const double need = targets[j][k] * interference / g.at(j, static_cast<int>(k), j);
            if (need > best) {
                best = need;
                active[j] = static_cast<int>(k);
            }
        }
        next[j] = best;
    }
    return next;
}

CMatrix unit_directions_fallback(const ChannelSet& channels) {
    CMatrix d(channels.n_antennas(), channels.groups());
    for (int j = 0; j < channels.groups(); ++j) {
        CVector sum = CVector::Zero(channels.n_antennas());
        for (int k = 0; k < channels.group_size(j); ++k) sum += channels.h(j, k);
        if (sum.norm() > 0.0)
            d.col(j) = sum / sum.norm();
        else
            d.col(j) = CVector::Unit(channels.n_antennas(), 0);
    }
    return d;
}

CMatrix scale_columns(const CMatrix& directions, const RVector& p) {
    CMatrix w = directions;
    for (Eigen::Index j = 0; j < w.cols(); ++j) w.col(j) *= std::sqrt(std::max(p[j], 0.0));
    return w;
}

constexpr double kCoarseTolerance = 1e-4;
constexpr double kCoarseDecisionBand = 0.05;

template <typename Score>
void for_each_candidate(std::size_t count, Execution execution, Score&& score) {
    const long n = static_cast<long>(count);
#ifdef _OPENMP
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
        for (long s = 0; s < n; ++s) score(static_cast<std::size_t>(s));
        return;
    }
#else
    (void)execution;
#endif
    for (long s = 0; s < n; ++s) score(static_cast<std::size_t>(s));
}

} // namespace

SinrTargets uniform_targets(const SystemConfig& config, double gamma) {
    SinrTargets t(config.groups);
    for (int j = 0; j < config.groups; ++j) t[j].assign(config.group_sizes[j], gamma);
    return t;
}

double sinr(const ChannelSet& channels, const CMatrix& weights, int j, int k, double noise_power) {
    check_dims(channels, weights);
    const CVector& h = channels.h(j, k);
    double interference = noise_power;
    for (int i = 0; i < channels.groups(); ++i)
        if (i != j) interference += std::norm(h.dot(weights.col(i)));
    return std::norm(h.dot(weights.col(j))) / interference;
}

namespace {

/// Shared layout: G PSD blocks of size 2N, then `extra_slacks` nonnegatives
/// after the per-UE slacks, and `extra_rows` rows after the per-UE rows.
QosSdr sinr_constraint_skeleton(const ChannelSet& channels, const SinrTargets& targets,
                                double noise_power, int extra_slacks, int extra_rows) {
    check_targets(channels, targets);
    const int N = channels.n_antennas();
    const int G = channels.groups();
    const int dim = 2 * N;
    const Eigen::Index block_len = static_cast<Eigen::Index>(dim) * dim;
    const int m = channels.config().total_ues();

    QosSdr out;
    out.n_antennas = N;
    out.groups = G;
    SdpProblem& p = out.problem;
    p.block_sizes.assign(G, dim);
    p.n_nonneg = m + extra_slacks;
    const Eigen::Index n = p.n_vars();
    p.A = RMatrix::Zero(m + extra_rows, n);
    p.b = RVector::Zero(m + extra_rows);
    p.c = RVector::Zero(n);

    int row = 0;
    for (int j = 0; j < G; ++j) {
        for (int k = 0; k < channels.group_size(j); ++k, ++row) {
            const CVector& h = channels.h(j, k);
            const double gamma = targets[j][k];
            // h^H X h = (1/2) <embed(X), embed(h h^H)>
            const RMatrix coeff = 0.5 * embed_hermitian(h * h.adjoint());
            for (int i = 0; i < G; ++i) {
                const double w = (i == j) ? 1.0 : -gamma;
                p.A.row(row).segment(p.block_offset(i), block_len) = w * coeff.reshaped().transpose();
            }
            p.A(row, p.nonneg_offset() + row) = -1.0;
            p.b[row] = gamma * noise_power;
        }
    }
    return out;
}

/// Adds sum_j tr(X_j) (= half the trace of each embedded block) to `row` of A
/// or to c when row < 0.
void add_power_terms(QosSdr& sdr, int row, double weight) {
    SdpProblem& p = sdr.problem;
    const int dim = 2 * sdr.n_antennas;
    for (int j = 0; j < sdr.groups; ++j) {
        const Eigen::Index off = p.block_offset(j);
        for (int d = 0; d < dim; ++d) {
            const Eigen::Index idx = off + static_cast<Eigen::Index>(d) * dim + d;
            if (row < 0)
                p.c[idx] += 0.5 * weight;
            else
                p.A(row, idx) += 0.5 * weight;
        }
    }
}

} // namespace

QosSdr build_qos_sdr(const ChannelSet& channels, const SinrTargets& targets, double noise_power) {
    QosSdr out = sinr_constraint_skeleton(channels, targets, noise_power, 0, 0);
    add_power_terms(out, -1, 1.0);
    return out;
}

QosSdr build_mmf_feasibility_sdr(const ChannelSet& channels, double gamma, double power_budget,
                                 double noise_power) {
    QosSdr out = sinr_constraint_skeleton(channels, uniform_targets(channels.config(), gamma),
                                          noise_power, 1, 1);
    SdpProblem& p = out.problem;
    const int m = channels.config().total_ues();
    add_power_terms(out, m, 1.0);
    p.A(m, p.nonneg_offset() + m) = 1.0;
    p.b[m] = power_budget;
    add_power_terms(out, -1, 1.0);
    return out;
}

QosSdr build_mmf_margin_sdr(const ChannelSet& channels, double gamma, double power_budget,
                            double noise_power) {
    QosSdr out = sinr_constraint_skeleton(channels, uniform_targets(channels.config(), gamma),
                                          noise_power, 2, 1);
    SdpProblem& p = out.problem;
    const int m = channels.config().total_ues();
    const Eigen::Index tau = p.nonneg_offset() + m;
    // gamma * noise moves from b to the tau column.
    for (int r = 0; r < m; ++r) {
        p.A(r, tau) = -p.b[r];
        p.b[r] = 0.0;
    }
    add_power_terms(out, m, 1.0);
    p.A(m, tau + 1) = 1.0;
    p.b[m] = power_budget;
    p.c[tau] = -1.0;
    return out;
}

SdrSolution solve_qos_sdr(const QosSdr& sdr, const SdpSettings& settings) {
    const SdpResult r = solve_sdp(sdr.problem, settings);
    SdrSolution out;
    out.status = r.status;
    out.primal_residual = r.primal_residual;
    out.dual_residual = r.dual_residual;
    out.iterations = r.iterations;
    const int dim = 2 * sdr.n_antennas;
    for (int j = 0; j < sdr.groups; ++j) {
        Eigen::Map<const RMatrix> block(r.x.data() + sdr.problem.block_offset(j), dim, dim);
        CMatrix X = extract_hermitian(0.5 * (block + block.transpose()));
        X = 0.5 * (X + X.adjoint()).eval();
        out.objective += X.trace().real();
        out.X.push_back(std::move(X));
    }
    out.slacks = r.x.tail(sdr.problem.n_nonneg);
    return out;
}

GainTable compute_gains(const ChannelSet& channels, const CMatrix& directions) {
    check_dims(channels, directions);
    GainTable t;
    t.gains.resize(channels.groups());
    for (int j = 0; j < channels.groups(); ++j) {
        RMatrix& g = t.gains[j];
        g.resize(channels.group_size(j), channels.groups());
        for (int k = 0; k < channels.group_size(j); ++k)
            for (int i = 0; i < channels.groups(); ++i)
                g(k, i) = std::norm(channels.h(j, k).dot(directions.col(i)));
    }
    return t;
}

PowerAllocation power_control_qos(const GainTable& gains, const SinrTargets& targets,
                                  double noise_power) {
    constexpr int kMaxIterations = 500;
    constexpr double kFixedPointTolerance = 1e-11;
    const int G = gains.groups();
    PowerAllocation out;
    out.p = RVector::Zero(G);

    double demand = 0.0;
    double min_gain = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G; ++j) {
        for (Eigen::Index k = 0; k < gains.gains[j].rows(); ++k) {
            const double g = gains.at(j, static_cast<int>(k), j);
            if (!(g > 0.0)) return out;
            min_gain = std::min(min_gain, g);
            demand += targets[j][k] * noise_power;
        }
    }
    const double divergence_level = 1e6 * demand / min_gain;

    std::vector<int> active;
    RVector p = RVector::Zero(G);
    for (int it = 0; it < kMaxIterations; ++it) {
        p = interference_step(gains, targets, p, noise_power, active);
        if (!p.allFinite() || p.sum() > divergence_level) {
            out.p = p;
            return out;
        }

        // Polish: exact fixed point of the affine map selected by `active`.
        RMatrix system = RMatrix::Identity(G, G);
        RVector rhs(G);
        for (int j = 0; j < G; ++j) {
            const int k = active[j];
            const double own = gains.at(j, k, j);
            const double gamma = targets[j][k];
            for (int i = 0; i < G; ++i)
                if (i != j) system(j, i) = -gamma * gains.at(j, k, i) / own;
            rhs[j] = gamma * noise_power / own;
        }
        const RVector candidate = system.fullPivLu().solve(rhs);
        if (candidate.allFinite() && candidate.minCoeff() >= 0.0) {
            std::vector<int> check_active;
            const RVector image =
                interference_step(gains, targets, candidate, noise_power, check_active);
            const double scale = std::max(candidate.cwiseAbs().maxCoeff(), 1e-300);
            if ((image - candidate).cwiseAbs().maxCoeff() <= kFixedPointTolerance * scale) {
                out.p = candidate;
                out.converged = true;
                return out;
            }
        }
    }
    out.p = p;
    return out;
}

MmfPowerResult power_control_mmf(const GainTable& gains, double power_budget,
                                 double noise_power) {
    const int G = gains.groups();
    MmfPowerResult out;
    out.allocation.p = RVector::Zero(G);
    out.allocation.converged = true;

    double hi = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G; ++j)
        for (Eigen::Index k = 0; k < gains.gains[j].rows(); ++k)
            hi = std::min(hi, power_budget * gains.at(j, static_cast<int>(k), j) / noise_power);
    if (!(hi > 0.0) || !std::isfinite(hi)) return out;

    double lo = 0.0;
    RVector best = RVector::Constant(G, power_budget / G);
    SinrTargets targets(G);
    while (hi - lo > 1e-4 * hi) {
        const double mid = 0.5 * (lo + hi);
        for (int j = 0; j < G; ++j) targets[j].assign(gains.gains[j].rows(), mid);
        const PowerAllocation pc = power_control_qos(gains, targets, noise_power);
        if (pc.converged && pc.total() <= power_budget) {
            lo = mid;
            best = pc.p;
        } else {
            hi = mid;
        }
    }
    if (best.sum() > 0.0) best *= power_budget / best.sum();
    double best_gamma = min_sinr_from_gains(gains, best, noise_power);

    // Balanced allocation for the binding UEs: p = gamma (F p + u), 1'p = P,
    // i.e. p is the Perron vector of F + u 1'/P and gamma = 1 / lambda_max.
    std::vector<int> binding(G, 0);
    for (int j = 0; j < G; ++j) {
        double worst = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < gains.gains[j].rows(); ++k) {
            const double s = sinr_from_gains(gains, best, j, static_cast<int>(k), noise_power);
            if (s < worst) {
                worst = s;
                binding[j] = static_cast<int>(k);
            }
        }
    }
    RMatrix balance(G, G);
    for (int j = 0; j < G; ++j) {
        const int k = binding[j];
        const double own = gains.at(j, k, j);
        for (int i = 0; i < G; ++i)
            balance(j, i) = (i == j ? 0.0 : gains.at(j, k, i) / own) +
                            noise_power / own / power_budget;
    }
    Eigen::EigenSolver<RMatrix> es(balance);
    Eigen::Index top = 0;
    es.eigenvalues().real().maxCoeff(&top);
    RVector perron = es.eigenvectors().col(top).real();
    if (perron.sum() < 0.0) perron = -perron;
    if (perron.minCoeff() > 0.0) {
        perron *= power_budget / perron.sum();
        const double g = min_sinr_from_gains(gains, perron, noise_power);
        if (g >= best_gamma) {
            best = perron;
            best_gamma = g;
        }
    }
    out.allocation.p = best;
    out.gamma = best_gamma;
    return out;
}

CMatrix principal_directions(std::span<const CMatrix> X) {
    const Eigen::Index N = X.empty() ? 0 : X.front().rows();
    CMatrix d(N, static_cast<Eigen::Index>(X.size()));
    for (std::size_t j = 0; j < X.size(); ++j) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(X[j]);
        const Eigen::Index top = N - 1;
        if (!(es.eigenvalues()[top] > 0.0)) {
            d.col(j) = CVector::Unit(N, 0);
            continue;
        }
        d.col(j) = es.eigenvectors().col(top).normalized();
    }
    return d;
}

std::vector<CMatrix> gaussian_randomize(std::span<const CMatrix> X, int n_rand,
                                        std::uint64_t seed) {
    if (n_rand < 1) throw std::invalid_argument("n_rand must be >= 1");
    const Eigen::Index N = X.empty() ? 0 : X.front().rows();
    const Eigen::Index G = static_cast<Eigen::Index>(X.size());
    std::vector<CMatrix> roots;
    roots.reserve(X.size());
    for (const auto& x : X) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (x + x.adjoint()));
        const RVector sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        roots.push_back(es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint());
    }
    Rng rng(seed);
    std::vector<CMatrix> samples(n_rand, CMatrix(N, G));
    CVector u(N);
    for (int s = 0; s < n_rand; ++s) {
        for (Eigen::Index j = 0; j < G; ++j) {
            for (Eigen::Index n = 0; n < N; ++n) u[n] = rng.complex_normal();
            const CVector w = roots[j] * u;
            const double norm = w.norm();
            samples[s].col(j) = norm > 0.0 ? CVector(w / norm) : CVector(CVector::Unit(N, 0));
        }
    }
    return samples;
}

QosDesign solve_qos(const ChannelSet& channels, const SinrTargets& targets, double noise_power,
                    const DesignOptions& options) {
    if (options.n_rand < 1) throw std::invalid_argument("n_rand must be >= 1");
    const QosSdr sdr = build_qos_sdr(channels, targets, noise_power);
    const SdrSolution sol = solve_qos_sdr(sdr, options.sdp);
    if (sol.status == SdpStatus::Infeasible)
        throw InfeasibleError("QoS relaxation is infeasible");

    std::vector<CMatrix> candidates;
    candidates.reserve(options.n_rand + 1);
    candidates.push_back(principal_directions(sol.X));
    for (auto& c : gaussian_randomize(sol.X, options.n_rand, options.seed))
        candidates.push_back(std::move(c));

    std::vector<PowerAllocation> scored(candidates.size());
    for_each_candidate(candidates.size(), options.execution, [&](std::size_t s) {
        scored[s] = power_control_qos(compute_gains(channels, candidates[s]), targets, noise_power);
    });

    int best = -1;
    for (std::size_t s = 0; s < scored.size(); ++s) {
        if (!scored[s].converged) continue;
        if (best < 0 || scored[s].total() < scored[best].total()) best = static_cast<int>(s);
    }
    if (best < 0)
        throw InfeasibleError("no randomization candidate admits a feasible power allocation");

    QosDesign out;
    out.precoder.weights = scale_columns(candidates[best], scored[best].p);
    // An unconverged relaxation still seeds randomization but certifies nothing.
    out.sdr_status = sol.status;
    out.sdr_objective =
        sol.status == SdpStatus::Optimal ? sol.objective : std::numeric_limits<double>::quiet_NaN();
    out.chosen_candidate = best;
    return out;
}

MmfDesign solve_mmf(const ChannelSet& channels, double power_budget, double noise_power,
                    const DesignOptions& options) {
    if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be > 0");
    if (options.n_rand < 1) throw std::invalid_argument("n_rand must be >= 1");

    double hi = std::numeric_limits<double>::infinity();
    for (int j = 0; j < channels.groups(); ++j)
        for (int k = 0; k < channels.group_size(j); ++k)
            hi = std::min(hi, power_budget * channels.h(j, k).squaredNorm() / noise_power);

    double lo = 0.0;
    std::vector<CMatrix> feasible_X;
    const int n_ues = channels.config().total_ues();
    SdpSettings coarse = options.sdp;
    coarse.tolerance = std::max(options.sdp.tolerance, kCoarseTolerance);
    coarse.gap_tolerance = std::max(options.sdp.gap_tolerance, kCoarseTolerance);
    if (hi > 0.0) {
        while (hi - lo > 1e-4 * hi) {
            const double mid = 0.5 * (lo + hi);
            const QosSdr sdr = build_mmf_margin_sdr(channels, mid, power_budget, noise_power);
            // Far from the boundary a coarse solve already decides the step.
            SdrSolution sol = solve_qos_sdr(sdr, coarse);
            double margin = sol.slacks[n_ues];
            if (sol.status != SdpStatus::Optimal || std::abs(margin - 1.0) <= kCoarseDecisionBand) {
                sol = solve_qos_sdr(sdr, options.sdp);
                margin = sol.slacks[n_ues];
            }
            if (sol.status == SdpStatus::Optimal && margin >= 1.0) {
                lo = mid;
                feasible_X = std::move(sol.X);
            } else {
                hi = mid;
            }
        }
    }

    std::vector<CMatrix> candidates;
    if (feasible_X.empty()) {
        candidates.push_back(unit_directions_fallback(channels));
    } else {
        candidates.reserve(options.n_rand + 1);
        candidates.push_back(principal_directions(feasible_X));
        for (auto& c : gaussian_randomize(feasible_X, options.n_rand, options.seed))
            candidates.push_back(std::move(c));
    }

    std::vector<MmfPowerResult> scored(candidates.size());
    for_each_candidate(candidates.size(), options.execution, [&](std::size_t s) {
        scored[s] =
            power_control_mmf(compute_gains(channels, candidates[s]), power_budget, noise_power);
    });

    std::size_t best = 0;
    for (std::size_t s = 1; s < scored.size(); ++s)
        if (scored[s].gamma > scored[best].gamma) best = s;

    MmfDesign out;
    out.precoder.weights = scale_columns(candidates[best], scored[best].allocation.p);
    out.sdr_upper_bound = hi;
    out.chosen_candidate = static_cast<int>(best);
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < channels.groups(); ++j)
        for (int k = 0; k < channels.group_size(j); ++k)
            worst = std::min(worst, sinr(channels, out.precoder.weights, j, k, noise_power));
    out.achieved_min_sinr = worst;
    return out;
}

} // namespace mhp
