// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "mhp/errors.hpp"
#include "mhp/evaluation.hpp"
#include "mhp/fd_design.hpp"
#include "support.hpp"

using namespace mhp;
using mhp::fixtures::iid_channels;

namespace {

ChannelSet scalar_channels(std::vector<std::vector<cdouble>> h) {
    std::vector<int> sizes;
    for (const auto& g : h) sizes.push_back(static_cast<int>(g.size()));
    ChannelSet ch(fixtures::config(1, sizes), 0);
    for (std::size_t j = 0; j < h.size(); ++j)
        for (std::size_t k = 0; k < h[j].size(); ++k) {
            CVector v(1);
            v[0] = h[j][k];
            ch.set(static_cast<int>(j), static_cast<int>(k), v);
        }
    return ch;
}

GainTable toy_gains(double direct, double cross) {
    GainTable g;
    for (int j = 0; j < 2; ++j) {
        RMatrix m(1, 2);
        m(0, j) = direct;
        m(0, 1 - j) = cross;
        g.gains.push_back(m);
    }
    return g;
}

// Best min_k |h_k^H d|^2 over unit d = (cos t, sin t e^{i psi}) by a coarse
// grid followed by one refinement around the best point.
double grid_best_min_gain(const ChannelSet& ch) {
    auto f = [&](double t, double psi) {
        CVector d(2);
        d << std::cos(t), std::polar(std::sin(t), psi);
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < ch.group_size(0); ++k) m = std::min(m, std::norm(ch.h(0, k).dot(d)));
        return m;
    };
    const int steps = 200;
    double best = -1, bt = 0, bp = 0;
    const double dt = (kPi / 2) / steps, dp = kTwoPi / steps;
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; b < steps; ++b)
            if (const double v = f(a * dt, b * dp); v > best) best = v, bt = a * dt, bp = b * dp;
    const double ct = bt, cp = bp;
    for (int a = -steps / 2; a <= steps / 2; ++a)
        for (int b = -steps / 2; b <= steps / 2; ++b) {
            const double t = std::clamp(ct + a * 2 * dt / steps, 0.0, kPi / 2);
            best = std::max(best, f(t, cp + b * 2 * dp / steps));
        }
    return best;
}

} // namespace

TEST(Sinr, NoInterference) {
    const ChannelSet ch = scalar_channels({{1.0}});
    CMatrix w(1, 1);
    w << std::sqrt(10.0);
    EXPECT_NEAR(sinr(ch, w, 0, 0, 1.0), 10.0, 1e-12);
}

TEST(Sinr, ScalarInterference) {
    const ChannelSet ch = scalar_channels({{1.0}, {1.0}});
    CMatrix w(1, 2);
    w << 1.0, 2.0;
    EXPECT_NEAR(sinr(ch, w, 0, 0, 1.0), 0.2, 1e-15);
}

TEST(Sinr, MatchesDirectLoop) {
    const ChannelSet ch = iid_channels(5, {2, 3, 1}, 4);
    Rng rng(8);
    const CMatrix w = fixtures::random_matrix(5, 3, rng);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < ch.group_size(j); ++k) {
            double sig = 0, intf = 0.7;
            for (int i = 0; i < 3; ++i) {
                cdouble acc = 0;
                for (int n = 0; n < 5; ++n) acc += std::conj(ch.h(j, k)[n]) * w(n, i);
                (i == j ? sig : intf) += std::norm(acc);
            }
            EXPECT_NEAR(sinr(ch, w, j, k, 0.7), sig / intf, 1e-12 * (sig / intf));
        }
}

TEST(Sinr, DimensionMismatchThrows) {
    const ChannelSet ch = iid_channels(4, {1}, 1);
    EXPECT_THROW(sinr(ch, CMatrix::Zero(3, 1), 0, 0, 1.0), DimensionError);
}

TEST(QosSdr, ScalarInstance) {
    const ChannelSet ch = scalar_channels({{1.0}});
    const QosSdr sdr = build_qos_sdr(ch, {{4.0}}, 1.0);
    EXPECT_EQ(sdr.problem.A.rows(), 1);
    EXPECT_NEAR(sdr.problem.b[0], 4.0, 0.0);
    const SdrSolution s = solve_qos_sdr(sdr);
    ASSERT_EQ(s.status, SdpStatus::Optimal);
    EXPECT_NEAR(s.objective, 4.0, 1e-6);
    EXPECT_NEAR(s.X[0](0, 0).real(), 4.0, 1e-6);
}

TEST(QosSdr, ConstraintCount) {
    const ChannelSet ch = iid_channels(3, {3, 4}, 2);
    const QosSdr sdr = build_qos_sdr(ch, uniform_targets(ch.config(), 2.0), 1.0);
    EXPECT_EQ(sdr.problem.A.rows(), 7);
    EXPECT_EQ(sdr.problem.block_sizes.size(), 2u);
    EXPECT_EQ(sdr.problem.n_nonneg, 7);
}

TEST(QosSdr, CoefficientsMatchDirectExpansion) {
    const ChannelSet ch = iid_channels(3, {2, 2}, 5);
    SinrTargets t = {{1.5, 2.5}, {0.5, 3.0}};
    const QosSdr sdr = build_qos_sdr(ch, t, 0.8);
    const SdpProblem& p = sdr.problem;
    Rng rng(11);
    std::vector<CMatrix> X;
    RVector x = RVector::Zero(p.n_vars());
    for (int j = 0; j < 2; ++j) {
        const CMatrix m = fixtures::random_matrix(3, 3, rng);
        X.push_back(m * m.adjoint());
        x.segment(p.block_offset(j), 36) = embed_hermitian(X[j]).reshaped();
    }
    RVector slack(4);
    for (int i = 0; i < 4; ++i) slack[i] = rng.uniform();
    x.tail(4) = slack;
    const RVector ax = p.A * x;
    int row = 0;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k, ++row) {
            const CVector& h = ch.h(j, k);
            double want = (h.adjoint() * X[j] * h)(0, 0).real();
            want -= t[j][k] * (h.adjoint() * X[1 - j] * h)(0, 0).real();
            want -= slack[row];
            EXPECT_NEAR(ax[row], want, 1e-12 * std::max(1.0, std::abs(want)));
            EXPECT_NEAR(p.b[row], t[j][k] * 0.8, 1e-15);
        }
    double trace = 0;
    for (const auto& m : X) trace += m.trace().real();
    EXPECT_NEAR(p.c.dot(x), trace, 1e-12 * trace);
}

TEST(QosSdr, SingleUeClosedForm) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ChannelSet ch = iid_channels(4, {1}, 100 + s);
        const CVector& h = ch.h(0, 0);
        const double gamma = 3.0, want = gamma / h.squaredNorm();
        const SdrSolution sol = solve_qos_sdr(build_qos_sdr(ch, {{gamma}}, 1.0));
        ASSERT_EQ(sol.status, SdpStatus::Optimal);
        EXPECT_NEAR(sol.objective, want, 1e-6 * want);
        const CMatrix closed = want * h * h.adjoint() / h.squaredNorm();
        EXPECT_LT((sol.X[0] - closed).norm(), 1e-5 * want);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(sol.X[0]);
        const auto ev = es.eigenvalues();
        EXPECT_LE(std::abs(ev[2]) / ev[3], 1e-6);
    }
}

TEST(QosSdr, InfeasibleBudgetDetected) {
    const ChannelSet ch = iid_channels(3, {2}, 7);
    double bound = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) bound = std::min(bound, 10.0 * ch.h(0, k).squaredNorm());
    const SdrSolution s = solve_qos_sdr(build_mmf_feasibility_sdr(ch, 2.0 * bound, 10.0, 1.0));
    EXPECT_EQ(s.status, SdpStatus::Infeasible);
}

TEST(PowerControl, SingleGroupOneStep) {
    GainTable g;
    RMatrix m(3, 1);
    m << 2.0, 0.5, 1.0;
    g.gains.push_back(m);
    const PowerAllocation p = power_control_qos(g, {{4.0, 4.0, 4.0}}, 1.0);
    ASSERT_TRUE(p.converged);
    EXPECT_NEAR(p.p[0], 8.0, 1e-12);
}

TEST(PowerControl, SymmetricTwoGroupFixedPoint) {
    const PowerAllocation p = power_control_qos(toy_gains(1.0, 0.1), {{1.0}, {1.0}}, 1.0);
    ASSERT_TRUE(p.converged);
    // p = 0.1 p + 1
    EXPECT_NEAR(p.p[0], 1 / 0.9, 1e-8);
    EXPECT_NEAR(p.p[1], 1 / 0.9, 1e-8);
}

TEST(PowerControl, SpectralRadiusAboveOneDiverges) {
    // gamma * cross / direct = 1.5 >= 1
    const PowerAllocation p = power_control_qos(toy_gains(1.0, 1.0), {{1.5}, {1.5}}, 1.0);
    EXPECT_FALSE(p.converged);
}

TEST(PowerControl, ZeroDirectGainIsInfeasible) {
    EXPECT_FALSE(power_control_qos(toy_gains(0.0, 0.1), {{1.0}, {1.0}}, 1.0).converged);
}

TEST(PowerControl, MmfSingleUe) {
    GainTable g;
    g.gains.push_back(RMatrix::Ones(1, 1));
    const MmfPowerResult r = power_control_mmf(g, 10.0, 1.0);
    EXPECT_NEAR(r.gamma, 10.0, 1e-9);
    EXPECT_NEAR(r.allocation.p[0], 10.0, 1e-9);
    EXPECT_NEAR(power_control_mmf(g, 20.0, 1.0).gamma, 2 * r.gamma, 1e-8);
}

TEST(PowerControl, MmfBalancedTwoGroup) {
    // p1 = p2 = P/2 and gamma = (P/2) / (0.1 P/2 + 1)
    for (double P : {1.0, 10.0, 1e4}) {
        const MmfPowerResult r = power_control_mmf(toy_gains(1.0, 0.1), P, 1.0);
        const double want = (P / 2) / (0.1 * P / 2 + 1);
        EXPECT_NEAR(r.gamma, want, 1e-8 * want);
        EXPECT_LE(r.allocation.total(), P * (1 + 1e-9));
    }
}

TEST(PowerControl, MmfMonotoneInBudget) {
    const ChannelSet ch = iid_channels(4, {2, 3}, 21);
    Rng rng(4);
    CMatrix d = fixtures::random_matrix(4, 2, rng);
    d.colwise().normalize();
    const GainTable g = compute_gains(ch, d);
    double last = 0;
    for (double P : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
        const double gamma = power_control_mmf(g, P, 1.0).gamma;
        EXPECT_GE(gamma, last);
        last = gamma;
    }
}

TEST(Randomization, RankOneSamplesAreAligned) {
    Rng rng(2);
    const CVector v = fixtures::random_matrix(5, 1, rng).col(0);
    const std::vector<CMatrix> X{v * v.adjoint()};
    for (const CMatrix& s : gaussian_randomize(X, 50, 7)) {
        EXPECT_NEAR(s.col(0).norm(), 1.0, 1e-12);
        EXPECT_NEAR(std::abs(v.normalized().dot(s.col(0))), 1.0, 1e-9);
    }
}

TEST(Randomization, IdentityGivesUniformDirections) {
    const int n = 4;
    const std::vector<CMatrix> X{CMatrix::Identity(n, n)};
    double acc = 0;
    const auto samples = gaussian_randomize(X, 10000, 3);
    for (const CMatrix& s : samples) acc += std::norm(s(0, 0));
    EXPECT_NEAR(acc / samples.size(), 1.0 / n, 0.05 / n);
}

TEST(Randomization, DeterministicAndZeroRule) {
    const std::vector<CMatrix> X{CMatrix::Identity(3, 3), CMatrix::Zero(3, 3)};
    const auto a = gaussian_randomize(X, 5, 9);
    const auto b = gaussian_randomize(X, 5, 9);
    ASSERT_EQ(a.size(), 5u);
    for (int s = 0; s < 5; ++s) {
        EXPECT_EQ(a[s], b[s]);
        EXPECT_EQ(a[s].col(1), CVector::Unit(3, 0));
    }
}

TEST(SolveQos, SingleUeMatchedFilter) {
    const ChannelSet ch = iid_channels(4, {1}, 31);
    const CVector& h = ch.h(0, 0);
    DesignOptions opt;
    opt.n_rand = 20;
    const QosDesign d = solve_qos(ch, {{5.0}}, 2.0, opt);
    const double want = 5.0 * 2.0 / h.squaredNorm();
    EXPECT_NEAR(d.precoder.power(), want, 1e-7 * want);
    EXPECT_NEAR(std::abs(h.normalized().dot(d.precoder.weights.col(0).normalized())), 1.0, 1e-6);
}

TEST(SolveQos, GridOracleTwoAntennasTwoUes) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        const ChannelSet ch = iid_channels(2, {2}, 40 + s);
        const double want = 4.0 / grid_best_min_gain(ch);
        DesignOptions opt;
        opt.seed = s;
        const QosDesign d = solve_qos(ch, {{4.0, 4.0}}, 1.0, opt);
        EXPECT_NEAR(d.precoder.power(), want, 0.03 * want);
    }
}

TEST(SolveMmf, GridOracleTwoAntennasTwoUes) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        const ChannelSet ch = iid_channels(2, {2}, 50 + s);
        const double want = 10.0 * grid_best_min_gain(ch);
        DesignOptions opt;
        opt.seed = s;
        const MmfDesign d = solve_mmf(ch, 10.0, 1.0, opt);
        EXPECT_NEAR(d.achieved_min_sinr, want, 0.03 * want);
    }
}

TEST(SolveMmf, ScalarAllPowerToOneUe) {
    const ChannelSet ch = scalar_channels({{1.0}});
    const MmfDesign d = solve_mmf(ch, 10.0, 1.0, {});
    EXPECT_NEAR(d.achieved_min_sinr, 10.0, 1e-8);
    EXPECT_NEAR(std::abs(d.precoder.weights(0, 0)), std::sqrt(10.0), 1e-8);
}

TEST(SolveQos, FeasibleAndAboveRelaxation) {
    for (std::uint64_t s = 0; s < 4; ++s) {
        const ChannelSet ch = generate_channels(fixtures::config(6, {2, 2}), 60 + s);
        const SinrTargets t = uniform_targets(ch.config(), 2.0);
        DesignOptions opt;
        opt.seed = s;
        opt.n_rand = 40;
        QosDesign d;
        try {
            d = solve_qos(ch, t, 1.0, opt);
        } catch (const InfeasibleError&) {
            continue;
        }
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                EXPECT_GE(sinr(ch, d.precoder.weights, j, k, 1.0), 2.0 * (1 - 1e-9));
        ASSERT_EQ(d.sdr_status, SdpStatus::Optimal);
        EXPECT_GE(d.precoder.power(), d.sdr_objective * (1 - 1e-6));
    }
}

TEST(SolveQos, InfeasibleThrows) {
    // Two groups sharing one scalar channel cannot both reach SINR 2.
    const ChannelSet ch = scalar_channels({{1.0}, {1.0}});
    EXPECT_THROW(solve_qos(ch, {{2.0}, {2.0}}, 1.0, {}), InfeasibleError);
}

TEST(SolveMmf, BudgetBoundAndConsistency) {
    const ChannelSet ch = generate_channels(fixtures::config(6, {3}), 77);
    DesignOptions opt;
    opt.n_rand = 50;
    const MmfDesign m = solve_mmf(ch, 10.0, 1.0, opt);
    EXPECT_LE(m.precoder.power(), 10.0 * (1 + 1e-9));
    EXPECT_NEAR(m.achieved_min_sinr, min_sinr(ch, m.precoder.weights, 1.0), 1e-9 * m.achieved_min_sinr);
    EXPECT_LE(m.achieved_min_sinr, m.sdr_upper_bound * (1 + 1e-9));
    const QosDesign q = solve_qos(ch, uniform_targets(ch.config(), m.achieved_min_sinr), 1.0, opt);
    EXPECT_LE(q.precoder.power(), 10.0 * 1.02);
}

TEST(Execution, SerialAndParallelDesignsAgree) {
    const ChannelSet ch = generate_channels(fixtures::config(6, {2, 2}), 5);
    DesignOptions serial;
    serial.seed = 3;
    serial.n_rand = 30;
    DesignOptions parallel = serial;
    parallel.execution = Execution::Parallel;
    const MmfDesign a = solve_mmf(ch, 10.0, 1.0, serial);
    const MmfDesign b = solve_mmf(ch, 10.0, 1.0, parallel);
    EXPECT_EQ(a.chosen_candidate, b.chosen_candidate);
    EXPECT_EQ(a.precoder.weights, b.precoder.weights);
}
