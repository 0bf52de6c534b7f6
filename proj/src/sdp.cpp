// SPDX-License-Identifier: Apache-2.0
#include "mhp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mhp {

Eigen::Index SdpProblem::n_vars() const {
    Eigen::Index n = n_nonneg;
    for (int d : block_sizes) n += static_cast<Eigen::Index>(d) * d;
    return n;
}

Eigen::Index SdpProblem::block_offset(int i) const {
    Eigen::Index off = 0;
    for (int k = 0; k < i; ++k) off += static_cast<Eigen::Index>(block_sizes[k]) * block_sizes[k];
    return off;
}

Eigen::Index SdpProblem::nonneg_offset() const {
    return block_offset(static_cast<int>(block_sizes.size()));
}

const char* to_string(SdpStatus s) {
    switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIterations: return "MaxIterations";
    }
    return "?";
}

namespace {

constexpr double kPenaltyMin = 1e-6;
constexpr double kPenaltyMax = 1e6;
constexpr double kPenaltyFactor = 2.0;
constexpr double kBalanceRatio = 5.0;
constexpr int kFirstRebalance = 10;
constexpr double kRebalanceGrowth = 1.5;
constexpr int kInfeasibilityCheckEvery = 50;
constexpr double kRayTolerance = 1e-4;

/// Splits v into its projections on K and -K: s = P_K(v), x = P_K(-v).
/// Both share one eigendecomposition per PSD block, so s'x = 0 exactly.
class ConeProjector {
public:
    explicit ConeProjector(const SdpProblem& p) : p_(p), solvers_(p.block_sizes.size()) {}

    void split(const RVector& v, RVector& s, RVector& x) {
        for (std::size_t i = 0; i < p_.block_sizes.size(); ++i) {
            const int d = p_.block_sizes[i];
            const Eigen::Index off = p_.block_offset(static_cast<int>(i));
            Eigen::Map<const RMatrix> vb(v.data() + off, d, d);
            const RMatrix sym = 0.5 * (vb + vb.transpose());
            auto& es = solvers_[i];
            es.compute(sym);
            const RVector& lam = es.eigenvalues();
            const RMatrix& q = es.eigenvectors();
            Eigen::Map<RMatrix> sb(s.data() + off, d, d);
            Eigen::Map<RMatrix> xb(x.data() + off, d, d);
            sb = q * lam.cwiseMax(0.0).asDiagonal() * q.transpose();
            xb = q * (-lam).cwiseMax(0.0).asDiagonal() * q.transpose();
        }
        const Eigen::Index off = p_.nonneg_offset();
        for (Eigen::Index i = 0; i < p_.n_nonneg; ++i) {
            s[off + i] = std::max(v[off + i], 0.0);
            x[off + i] = std::max(-v[off + i], 0.0);
        }
    }

    /// Largest violation of z in -K: max over blocks of lambda_max and over the
    /// orthant of the positive entries.
    double max_violation_of_minus_cone(const RVector& z) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p_.block_sizes.size(); ++i) {
            const int d = p_.block_sizes[i];
            Eigen::Map<const RMatrix> zb(z.data() + p_.block_offset(static_cast<int>(i)), d, d);
            Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (zb + zb.transpose()),
                                                      Eigen::EigenvaluesOnly);
            worst = std::max(worst, es.eigenvalues().maxCoeff());
        }
        const Eigen::Index off = p_.nonneg_offset();
        for (Eigen::Index i = 0; i < p_.n_nonneg; ++i) worst = std::max(worst, z[off + i]);
        return worst;
    }

private:
    const SdpProblem& p_;
    std::vector<Eigen::SelfAdjointEigenSolver<RMatrix>> solvers_;
};

} // namespace

SdpResult solve_sdp(const SdpProblem& problem, const SdpSettings& settings) {
    const Eigen::Index m = problem.n_constraints();
    const Eigen::Index n = problem.n_vars();
    if (problem.A.cols() != n || problem.b.size() != m || problem.c.size() != n)
        throw std::invalid_argument("solve_sdp: inconsistent problem dimensions");

    // Row equilibration, then unit-norm b and c.
    RVector row_scale(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double nr = problem.A.row(i).norm();
        row_scale[i] = nr > 0.0 ? 1.0 / nr : 1.0;
    }
    const RMatrix A = row_scale.asDiagonal() * problem.A;
    RVector b = row_scale.asDiagonal() * problem.b;
    const double b_scale = b.norm() > 0.0 ? b.norm() : 1.0;
    const double c_scale = problem.c.norm() > 0.0 ? problem.c.norm() : 1.0;
    b /= b_scale;
    const RVector c = problem.c / c_scale;

    RMatrix gram = A * A.transpose();
    const double ridge = 1e-14 * std::max(1.0, gram.trace());
    gram.diagonal().array() += ridge;
    const Eigen::LLT<RMatrix> gram_llt(gram);

    ConeProjector cone(problem);
    double mu = settings.initial_penalty;

    // One evaluation of the splitting map; leaves the iterate's x, s, y behind.
    struct Point {
        RVector x, s, y, tv;
    };
    auto evaluate = [&](const RVector& v, Point& pt) {
        pt.x.resize(n);
        pt.s.resize(n);
        cone.split(v, pt.s, pt.x);
        pt.x /= mu;
        pt.y = gram_llt.solve(mu * (b - A * pt.x) - A * (pt.s - c));
        pt.tv = c - A.transpose() * pt.y - mu * pt.x;
    };

    const int memory = std::max(settings.anderson_memory, 0);
    std::deque<RVector> dv, df;
    RVector v_last, f_last;
    auto reset_history = [&] {
        dv.clear();
        df.clear();
        v_last.resize(0);
    };

    RVector v = RVector::Zero(n);
    Point cur, trial;
    evaluate(v, cur);
    RVector y_check = RVector::Zero(m);
    int next_rebalance = kFirstRebalance;

    SdpResult out;
    out.status = SdpStatus::MaxIterations;
    double pres = 0.0, dres = 0.0, gap = 0.0, pobj = 0.0, dobj = 0.0;
    int it = 0;
    for (it = 1; it <= settings.max_iterations; ++it) {
        pres = (A * cur.x - b).norm() / (1.0 + b.norm());
        dres = (A.transpose() * cur.y + cur.s - c).norm() / (1.0 + c.norm());
        pobj = c.dot(cur.x);
        dobj = b.dot(cur.y);
        gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (settings.log && settings.log_every > 0 && it % settings.log_every == 0)
            *settings.log << it << ',' << pres << ',' << dres << ','
                          << pobj * b_scale * c_scale << '\n';

        if (pres <= settings.tolerance && dres <= settings.tolerance &&
            gap <= settings.gap_tolerance) {
            out.status = SdpStatus::Optimal;
            break;
        }

        if (it % kInfeasibilityCheckEvery == 0) {
            // Dual iterates of an infeasible program drift along a Farkas ray.
            const RVector step = cur.y - y_check;
            y_check = cur.y;
            const double step_norm = step.norm();
            if (step_norm > 0.0 && cur.y.norm() > 1e3) {
                const RVector ray = step / step_norm;
                const double by = b.dot(ray);
                if (by > 0.0) {
                    const double viol =
                        cone.max_violation_of_minus_cone(RVector(A.transpose() * ray));
                    if (viol <= kRayTolerance * by) {
                        out.status = SdpStatus::Infeasible;
                        break;
                    }
                }
            }
        }

        if (it == next_rebalance) {
            next_rebalance = static_cast<int>(next_rebalance * kRebalanceGrowth) + 1;
            double next_mu = mu;
            if (pres > kBalanceRatio * dres)
                next_mu = std::min(mu * kPenaltyFactor, kPenaltyMax);
            else if (dres > kBalanceRatio * pres)
                next_mu = std::max(mu / kPenaltyFactor, kPenaltyMin);
            if (next_mu != mu) {
                // Same (x, s), re-expressed for the new penalty.
                mu = next_mu;
                v = cur.s - mu * cur.x;
                reset_history();
                evaluate(v, cur);
                continue;
            }
        }

        const RVector f = cur.tv - v;
        if (memory > 0) {
            if (v_last.size() == n) {
                dv.push_back(v - v_last);
                df.push_back(f - f_last);
                if (static_cast<int>(dv.size()) > memory) {
                    dv.pop_front();
                    df.pop_front();
                }
            }
            v_last = v;
            f_last = f;
        }
        if (!df.empty()) {
            const auto k = static_cast<Eigen::Index>(df.size());
            RMatrix F(n, k), G(n, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                F.col(i) = df[i];
                G.col(i) = dv[i] + df[i];
            }
            RMatrix normal = F.transpose() * F;
            normal.diagonal().array() += 1e-10 * normal.trace() / k + 1e-300;
            const RVector weights = normal.ldlt().solve(F.transpose() * f);
            const RVector v_acc = cur.tv - G * weights;
            evaluate(v_acc, trial);
            if ((trial.tv - v_acc).norm() <= f.norm()) {
                v = v_acc;
                std::swap(cur, trial);
                continue;
            }
        }
        v = cur.tv;
        evaluate(v, cur);
    }

    out.iterations = std::min(it, settings.max_iterations);
    out.x = cur.x * b_scale;
    out.y = c_scale * (row_scale.asDiagonal() * cur.y);
    out.objective = pobj * b_scale * c_scale;
    out.dual_objective = dobj * b_scale * c_scale;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    return out;
}

} // namespace mhp
