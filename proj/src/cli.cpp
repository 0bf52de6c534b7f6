// SPDX-License-Identifier: Apache-2.0
#include "mhp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "mhp/errors.hpp"
#include "mhp/experiment.hpp"
#include "mhp/io.hpp"

namespace mhp {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// First non-comment token of a file, used to tell precoder kinds apart.
std::string file_magic(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    while (std::getline(is, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        return line.substr(pos, line.find_first_of(" \t\r", pos) - pos);
    }
    return {};
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fully-digital multicast precoder design and exact hybrid factorization", "mhp"};
    app.require_subcommand(1);

    // gen-channels
    auto* gen = app.add_subcommand("gen-channels", "Draw a channel set and write it to a file");
    int gen_n = 8, gen_g = 1, gen_l = 3;
    std::vector<int> gen_k{7};
    std::uint64_t gen_seed = 0;
    double gen_spacing = 0.5, gen_noise = 1.0;
    std::string gen_out;
    gen->add_option("-N,--antennas", gen_n, "Antennas")->check(CLI::PositiveNumber);
    gen->add_option("-G,--groups", gen_g, "Multicast groups")->check(CLI::PositiveNumber);
    gen->add_option("-K,--group-sizes", gen_k, "UEs per group (one value is shared)")->delimiter(',');
    gen->add_option("-L,--paths", gen_l, "Propagation paths")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("--spacing", gen_spacing, "Antenna spacing / wavelength");
    gen->add_option("--noise", gen_noise, "Noise power");
    gen->add_option("-o,--output", gen_out, "Output file")->required();

    // solve-fd
    auto* fd = app.add_subcommand("solve-fd", "Design a fully-digital precoder");
    std::string fd_channels, fd_out, fd_problem = "MMF";
    double fd_power = 10.0, fd_target = 128.0;
    int fd_rand = 100;
    std::uint64_t fd_seed = 0;
    fd->add_option("channels", fd_channels, "Channel file")->required();
    fd->add_option("--problem", fd_problem, "QoS or MMF");
    fd->add_option("--power", fd_power, "Power budget in W (MMF)");
    fd->add_option("--sinr-target", fd_target, "Linear SINR target (QoS)");
    fd->add_option("--n-rand", fd_rand, "Gaussian randomization samples")->check(CLI::PositiveNumber);
    fd->add_option("--seed", fd_seed, "Randomization seed");
    fd->add_option("-o,--output", fd_out, "Output precoder file")->required();

    // decompose
    auto* dec = app.add_subcommand("decompose", "Factor a precoder into a hybrid precoder");
    std::string dec_in, dec_out, dec_family = "primary", dec_bits = "inf", dec_rho = "per-group";
    dec->add_option("precoder", dec_in, "Precoder file")->required();
    dec->add_option("--family", dec_family, "primary or alternate");
    dec->add_option("--bits", dec_bits, "Phase-shifter resolution (integer or inf)");
    dec->add_option("--rho-mode", dec_rho, "per-group or uniform");
    dec->add_option("-o,--output", dec_out, "Output hybrid file")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Report metrics of a precoder on a channel set");
    std::string ev_channels, ev_precoder;
    ev->add_option("channels", ev_channels, "Channel file")->required();
    ev->add_option("precoder", ev_precoder, "Precoder or hybrid file")->required();

    // run
    auto* run = app.add_subcommand("run", "Run an experiment spec and write CSV");
    std::string run_spec, run_out;
    bool run_serial = false;
    run->add_option("spec", run_spec, "Experiment spec file")->required();
    run->add_option("-o,--output", run_out, "CSV file (default: stdout)");
    run->add_flag("--serial", run_serial, "Run realizations on one thread");

    // report
    auto* rep = app.add_subcommand("report", "Aggregate a results CSV");
    std::string rep_in;
    rep->add_option("csv", rep_in, "Results CSV")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "mhp: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            SystemConfig c;
            c.n_antennas = gen_n;
            c.groups = gen_g;
            c.group_sizes = gen_k.size() == 1 ? std::vector<int>(gen_g, gen_k.front()) : gen_k;
            c.n_paths = gen_l;
            c.spacing_ratio = gen_spacing;
            c.noise_power = gen_noise;
            save_channels(gen_out, generate_channels(c, gen_seed));
            return kExitOk;
        }
        if (fd->parsed()) {
            const ChannelSet ch = load_channels(fd_channels);
            const Problem problem = parse_problem(fd_problem);
            DesignOptions opt;
            opt.n_rand = fd_rand;
            opt.seed = fd_seed;
            opt.execution = Execution::Parallel;
            const double noise = ch.config().noise_power;
            try {
                if (problem == Problem::QoS) {
                    const auto d = solve_qos(ch, uniform_targets(ch.config(), fd_target), noise, opt);
                    save_precoder(fd_out, d.precoder);
                    out << "total_power_watts," << fmt(d.precoder.power()) << "\nsdr_lower_bound,"
                        << fmt(d.sdr_objective) << '\n';
                } else {
                    const auto d = solve_mmf(ch, fd_power, noise, opt);
                    save_precoder(fd_out, d.precoder);
                    out << "min_sinr," << fmt(d.achieved_min_sinr) << "\nsdr_upper_bound,"
                        << fmt(d.sdr_upper_bound) << '\n';
                }
            } catch (const InfeasibleError& e) {
                err << "mhp: infeasible: " << e.what() << '\n';
                return kExitInfeasible;
            }
            return kExitOk;
        }
        if (dec->parsed()) {
            const FdPrecoder w = load_precoder(dec_in);
            DecomposeOptions opt;
            opt.family = parse_phase_family(dec_family);
            opt.rho_mode = parse_rho_mode(dec_rho);
            HybridPrecoder h = decompose(w.weights, opt);
            const auto bits = parse_bits(dec_bits);
            if (bits) h = quantize_phases(h, QuantizationConfig::with_bits(*bits));
            save_hybrid(dec_out, h);
            out << "n_rf," << h.n_rf << "\nphase_shifters," << h.phase_shifter_count() << '\n';
            return kExitOk;
        }
        if (ev->parsed()) {
            const ChannelSet ch = load_channels(ev_channels);
            const std::string magic = file_magic(ev_precoder);
            CMatrix w;
            if (magic == "mhp-hybrid")
                w = reconstruct(load_hybrid(ev_precoder));
            else
                w = load_precoder(ev_precoder).weights;
            if (w.rows() != ch.n_antennas() || w.cols() != ch.groups())
                throw DimensionError("precoder shape does not match the channel set");
            out << "min_sinr," << fmt(min_sinr(ch, w, ch.config().noise_power)) << '\n'
                << "total_power_watts," << fmt(total_power(w)) << '\n';
            return kExitOk;
        }
        if (run->parsed()) {
            const ExperimentSpec spec = load_experiment_spec(run_spec);
            const auto records =
                run_experiment(spec, run_serial ? Execution::Serial : Execution::Parallel);
            if (run_out.empty())
                write_csv(out, records);
            else
                emit_csv(records, run_out);
            const bool all_infeasible =
                !records.empty() && std::all_of(records.begin(), records.end(),
                                                [](const ResultRecord& r) { return r.infeasible; });
            return all_infeasible ? kExitInfeasible : kExitOk;
        }
        if (rep->parsed()) {
            write_report(out, load_csv(rep_in));
            return kExitOk;
        }
    } catch (const ParseError& e) {
        err << "mhp: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "mhp: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "mhp: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace mhp
