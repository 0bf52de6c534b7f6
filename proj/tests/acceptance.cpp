// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "mhp/errors.hpp"
#include "mhp/evaluation.hpp"
#include "mhp/experiment.hpp"
#include "mhp/fd_design.hpp"
#include "mhp/hybrid.hpp"
#include "mhp/random.hpp"

using namespace mhp;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

CMatrix random_matrix(int rows, int cols, Rng& rng) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

SystemConfig config(int n, std::vector<int> sizes) {
    SystemConfig c;
    c.n_antennas = n;
    c.groups = static_cast<int>(sizes.size());
    c.group_sizes = std::move(sizes);
    return c;
}

std::string csv_of(const std::vector<ResultRecord>& rs) {
    std::ostringstream os;
    write_csv(os, rs);
    return os.str();
}

// Tracks relaxation-bound checks across every design solved below.
// The relaxations stop on a 1e-6 relative gap, so that is the slack allowed.
struct BoundLedger {
    int checked = 0;
    int violated = 0;
    int unconverged = 0;

    void qos(const QosDesign& q) {
        if (std::isnan(q.sdr_objective)) {
            ++unconverged;
            return;
        }
        ++checked;
        if (q.precoder.power() < q.sdr_objective * (1 - 1e-6)) ++violated;
    }
    void mmf(const MmfDesign& m) {
        ++checked;
        if (m.achieved_min_sinr > m.sdr_upper_bound * (1 + 1e-9)) ++violated;
    }
} bounds;

// ---------------------------------------------------------------------------

Verdict exact_implementation() {
    Verdict v;
    Rng rng(101);
    const int ns[] = {4, 8, 16, 64, 150};
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const int n = ns[i % 5], g = 1 + (i / 5) % 3;
        const CMatrix w = random_matrix(n, g, rng);
        const HybridPrecoder h = decompose(w);
        worst = std::max(worst, (reconstruct(h) - w).norm() / w.norm());
        v.require(h.n_rf == std::min(numerical_rank(w), g), "n_rf != min(rank, G)");
    }
    // constructed rank-deficient cases
    for (int i = 0; i < 40; ++i) {
        const int n = ns[i % 5], g = 2 + i % 2;
        const int rank = 1 + (i / 2) % (g - 1);
        const CMatrix w = random_matrix(n, rank, rng) * random_matrix(rank, g, rng);
        const HybridPrecoder h = decompose(w);
        worst = std::max(worst, (reconstruct(h) - w).norm() / w.norm());
        v.require(numerical_rank(w) == rank && h.n_rf == rank, "rank-deficient n_rf mismatch");
    }
    const HybridPrecoder z = decompose(CMatrix::Zero(8, 3));
    v.require(reconstruct(z).norm() == 0.0, "zero matrix not reproduced");
    v.require(worst <= 1e-10, "reconstruction error too large");
    char buf[96];
    std::snprintf(buf, sizeof buf, "max rel err %.2e", worst);
    if (v.pass) v.detail = buf;
    else v.detail += std::string(" (") + buf + ")";
    return v;
}

Verdict losslessness() {
    Verdict v;
    int solved = 0;
    double worst = 0;
    auto check = [&](const ChannelSet& ch, const CMatrix& w) {
        const CMatrix wh = reconstruct(decompose(w));
        const double e1 = rel(min_sinr(ch, wh, 1.0), min_sinr(ch, w, 1.0));
        const double e2 = rel(total_power(wh), total_power(w));
        worst = std::max({worst, e1, e2});
        ++solved;
    };
    auto run = [&](int n, std::vector<int> sizes, int realizations, std::uint64_t base) {
        for (int r = 0; r < realizations; ++r) {
            const ChannelSet ch = generate_channels(config(n, sizes), mix_seed(base, n, r));
            DesignOptions opt;
            opt.seed = r;
            opt.execution = Execution::Parallel;
            const MmfDesign m = solve_mmf(ch, 10.0, 1.0, opt);
            bounds.mmf(m);
            v.require(m.precoder.power() <= 10.0 * (1 + 1e-9), "MMF budget exceeded");
            check(ch, m.precoder.weights);
            try {
                const QosDesign q = solve_qos(ch, uniform_targets(ch.config(), 128.0), 1.0, opt);
                bounds.qos(q);
                v.require(min_sinr(ch, q.precoder.weights, 1.0) >= 128.0 * (1 - 1e-9), "QoS target missed");
                check(ch, q.precoder.weights);
            } catch (const InfeasibleError&) {
            }
        }
    };
    run(8, {7}, 5, 201);
    run(8, {5, 5}, 2, 202);
    run(16, {5, 5}, 2, 203);
    // N = 150, G = 2 without SDR: n_rf = 2 reconstruction
    Rng rng(204);
    for (int i = 0; i < 5; ++i) {
        const ChannelSet ch = generate_channels(config(150, {5, 5}), 300 + i);
        const CMatrix w = random_matrix(150, 2, rng);
        v.require(decompose(w).n_rf == 2, "N=150 needs more than 2 RF chains");
        check(ch, w);
    }
    v.require(worst <= 1e-9, "hybrid metric differs from FD");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d designs, max rel metric diff %.2e", solved, worst);
    if (v.pass) v.detail = buf;
    else v.detail += std::string(" (") + buf + ")";
    return v;
}

std::string fig3_csv;

Verdict quantization_thresholds() {
    Verdict v;
    const ExperimentSpec spec = load_experiment_spec(std::string(MHP_SPEC_DIR) + "/fig3_mmf_quantized.spec");
    const auto records = run_experiment(spec, Execution::Parallel);
    fig3_csv = csv_of(records);
    std::map<int, double> ratio;
    for (const auto& row : performance_table(records))
        if (row.bits) ratio[*row.bits] = row.ratio_of_means;
    v.require(spec.n_realizations == 100 && spec.n_rand == 100, "spec is not the 100x100 campaign");
    v.require(ratio.count(3) && ratio[3] >= 0.80 - 0.03, "b=3 ratio below 0.77");
    v.require(ratio.count(4) && ratio[4] >= 0.90 - 0.03, "b=4 ratio below 0.87");
    char buf[128];
    std::snprintf(buf, sizeof buf, "b=3 ratio %.4f (need 0.77), b=4 ratio %.4f (need 0.87)", ratio[3], ratio[4]);
    v.detail = v.pass ? std::string(buf) : v.detail + " (" + buf + ")";
    return v;
}

double grid_best_min_gain(const ChannelSet& ch) {
    auto f = [&](double t, double psi) {
        CVector d(2);
        d << std::cos(t), std::polar(std::sin(t), psi);
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < ch.group_size(0); ++k) m = std::min(m, std::norm(ch.h(0, k).dot(d)));
        return m;
    };
    const int steps = 200;
    const double dt = (kPi / 2) / steps, dp = kTwoPi / steps;
    double best = -1, bt = 0, bp = 0;
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; b < steps; ++b)
            if (const double val = f(a * dt, b * dp); val > best) best = val, bt = a * dt, bp = b * dp;
    const double ct = bt, cp = bp;
    for (int a = -steps / 2; a <= steps / 2; ++a)
        for (int b = -steps / 2; b <= steps / 2; ++b)
            best = std::max(best, f(std::clamp(ct + a * 2 * dt / steps, 0.0, kPi / 2), cp + b * 2 * dp / steps));
    return best;
}

Verdict solver_correctness() {
    Verdict v;
    {
        ChannelSet ch(config(1, {1}), 0);
        ch.set(0, 0, CVector::Ones(1));
        const SdrSolution s = solve_qos_sdr(build_qos_sdr(ch, {{4.0}}, 1.0));
        v.require(s.status == SdpStatus::Optimal && std::abs(s.objective - 4.0) <= 1e-6, "scalar SDP");
    }
    Rng rng(401);
    for (int i = 0; i < 20; ++i) {
        const int n = 2 + i % 6;
        ChannelSet ch(config(n, {1}), 0);
        const CVector h = random_matrix(n, 1, rng).col(0);
        ch.set(0, 0, h);
        const double want = 3.0 / h.squaredNorm();
        const SdrSolution s = solve_qos_sdr(build_qos_sdr(ch, {{3.0}}, 1.0));
        v.require(s.status == SdpStatus::Optimal && rel(s.objective, want) <= 1e-6, "G=1,K=1 closed form");
    }
    double worst = 0;
    for (int i = 0; i < 5; ++i) {
        ChannelSet ch(config(2, {2}), 0);
        for (int k = 0; k < 2; ++k) ch.set(0, k, random_matrix(2, 1, rng).col(0));
        const double g = grid_best_min_gain(ch);
        DesignOptions opt;
        opt.seed = i;
        const QosDesign q = solve_qos(ch, {{4.0, 4.0}}, 1.0, opt);
        const MmfDesign m = solve_mmf(ch, 10.0, 1.0, opt);
        worst = std::max({worst, rel(q.precoder.power(), 4.0 / g), rel(m.achieved_min_sinr, 10.0 * g)});
        bounds.qos(q);
        bounds.mmf(m);
    }
    v.require(worst <= 0.03, "grid-search oracle gap above 3%");
    v.require(bounds.violated == 0, "relaxation bound violated");
    char buf[128];
    std::snprintf(buf, sizeof buf, "grid gap %.2e, %d bound checks, %d violations, %d unconverged", worst,
                  bounds.checked, bounds.violated, bounds.unconverged);
    v.detail = v.pass ? std::string(buf) : v.detail + " (" + buf + ")";
    return v;
}

Verdict power_control() {
    Verdict v;
    auto toy = [](double direct, double cross) {
        GainTable g;
        for (int j = 0; j < 2; ++j) {
            RMatrix m(1, 2);
            m(0, j) = direct;
            m(0, 1 - j) = cross;
            g.gains.push_back(m);
        }
        return g;
    };
    const PowerAllocation p = power_control_qos(toy(1.0, 0.1), {{1.0}, {1.0}}, 1.0);
    v.require(p.converged && std::abs(p.p[0] - 1 / 0.9) <= 1e-8 && std::abs(p.p[1] - 1 / 0.9) <= 1e-8,
              "p = 1/0.9 fixed point");
    v.require(!power_control_qos(toy(1.0, 1.0), {{1.5}, {1.5}}, 1.0).converged,
              "spectral radius 1.5 not detected");
    if (v.pass) v.detail = "p = 1/0.9 within 1e-8; radius-1.5 toy non-convergent";
    return v;
}

Verdict quantization_bound() {
    Verdict v;
    Rng rng(601);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        const int n = std::vector<int>{4, 8, 16, 64}[i % 4], g = 1 + i % 3;
        const CMatrix w = random_matrix(n, g, rng);
        const HybridPrecoder h = decompose(w);
        const auto rho = digital_gains(w);
        const double rho_max = *std::max_element(rho.begin(), rho.end());
        for (int b = 1; b <= 8; ++b) {
            const double err = (reconstruct(quantize_phases(h, QuantizationConfig::with_bits(b))) - w).norm();
            const double bound = rho_max * 2 * (kPi / std::ldexp(1.0, b)) * std::sqrt(double(n) * g);
            worst = std::max(worst, err / bound);
        }
    }
    v.require(worst <= 1.0, "bound exceeded");
    char buf[64];
    std::snprintf(buf, sizeof buf, "max err/bound %.3f", worst);
    v.detail = v.pass ? std::string(buf) : v.detail + " (" + buf + ")";
    return v;
}

Verdict determinism() {
    Verdict v;
    const std::string dir = MHP_SPEC_DIR;
    const ExperimentSpec fig3 = load_experiment_spec(dir + "/fig3_mmf_quantized.spec");
    v.require(csv_of(run_experiment(fig3, Execution::Parallel)) == fig3_csv, "fig3 rerun differs");

    ExperimentSpec smoke = load_experiment_spec(dir + "/smoke.spec");
    const std::string a = csv_of(run_experiment(smoke, Execution::Parallel));
    v.require(csv_of(run_experiment(smoke, Execution::Serial)) == a, "smoke serial/parallel differ");

    const auto full = run_experiment(fig3, Execution::Parallel);
    ExperimentSpec half = fig3;
    half.n_realizations = 50;
    std::set<std::uint64_t> seeds;
    for (int r = 0; r < 50; ++r) seeds.insert(realization_seed(fig3.base_seed, 8, r));
    std::vector<ResultRecord> kept;
    for (const auto& r : full)
        if (seeds.count(r.seed)) kept.push_back(r);
    v.require(csv_of(run_experiment(half, Execution::Parallel)) == csv_of(kept), "prefix property");
    if (v.pass) v.detail = "byte-identical reruns; 50-of-100 prefix reproduced";
    return v;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
    };
    const Criterion criteria[] = {
        {"1 exact implementation", exact_implementation},
        {"2 performance losslessness", losslessness},
        {"3 quantization thresholds", quantization_thresholds},
        {"4 solver correctness", solver_correctness},
        {"5 power-control correctness", power_control},
        {"6 quantization bound", quantization_bound},
        {"7 determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
