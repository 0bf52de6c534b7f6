// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels. Usage: bench_kernels [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "mhp/experiment.hpp"
#include "mhp/fd_design.hpp"
#include "mhp/hybrid.hpp"
#include "mhp/random.hpp"

using namespace mhp;

namespace {

double seconds(const std::function<void()>& f, int repeats) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

CMatrix random_precoder(int n, int g, std::uint64_t seed) {
    Rng rng(seed);
    CMatrix w(n, g);
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < n; ++i) w(i, j) = rng.complex_normal();
    return w;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-28s %12.6f %12.6f %8.2fx\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

} // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    std::printf("workers: %d\n", worker_count());
    std::printf("%-28s %12s %12s %9s\n", "kernel", "serial[s]", "parallel[s]", "speedup");

    const CMatrix w = random_precoder(1024, 8, 1);
    for (auto exec : {Execution::Serial, Execution::Parallel}) (void)decompose(w, {.execution = exec});
    row("decompose N=1024 G=8", seconds([&] { (void)decompose(w, {.execution = Execution::Serial}); }, repeats),
        seconds([&] { (void)decompose(w, {.execution = Execution::Parallel}); }, repeats));

    const HybridPrecoder h = decompose(w);
    row("reconstruct N=1024 G=8", seconds([&] { (void)reconstruct(h, Execution::Serial); }, repeats),
        seconds([&] { (void)reconstruct(h, Execution::Parallel); }, repeats));

    SystemConfig c;
    c.n_antennas = 8;
    c.groups = 1;
    c.group_sizes = {7};
    const ChannelSet ch = generate_channels(c, 3);
    DesignOptions serial_opt;
    serial_opt.seed = 5;
    DesignOptions parallel_opt = serial_opt;
    parallel_opt.execution = Execution::Parallel;
    row("solve_qos N=8 K=7",
        seconds([&] { (void)solve_qos(ch, uniform_targets(c, 16.0), 1.0, serial_opt); }, 1),
        seconds([&] { (void)solve_qos(ch, uniform_targets(c, 16.0), 1.0, parallel_opt); }, 1));

    ExperimentSpec spec;
    spec.name = "bench";
    spec.problem = Problem::MMF;
    spec.n_list = {8};
    spec.group_sizes = {7};
    spec.n_realizations = 4;
    spec.n_rand = 50;
    spec.bits_list = {3, 4, std::nullopt};
    row("run_experiment 4 realizations", seconds([&] { (void)run_experiment(spec, Execution::Serial); }, 1),
        seconds([&] { (void)run_experiment(spec, Execution::Parallel); }, 1));
    return 0;
}
