// SPDX-License-Identifier: Apache-2.0
#include "mhp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mhp/errors.hpp"
#include "mhp/io.hpp"
#include "mhp/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhp {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back({});
    return out;
}

template <typename T>
T parse_number(const std::string& token, const char* what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
        throw std::invalid_argument(std::string("expected ") + what + ", got '" + token + "'");
    return v;
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (const auto& t : split(value, ',')) out.push_back(parse_number<int>(t, "an integer"));
    return out;
}

constexpr std::uint64_t kRandomizationStream = 0x52414E444F4D4E5AULL;  // "RANDOMNZ"

int bits_order(const std::optional<int>& b) {
    return b ? *b : std::numeric_limits<int>::max();
}

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CMatrix unit_columns(const CMatrix& w) {
    CMatrix d = w;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        const double n = d.col(j).norm();
        if (n > 0.0)
            d.col(j) /= n;
        else
            d.col(j) = CVector::Unit(d.rows(), 0);
    }
    return d;
}

} // namespace

void ExperimentSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("name must not be empty");
    if (name.find_first_of(",\n\"") != std::string::npos)
        throw std::invalid_argument("name must not contain commas, quotes or newlines");
    if (n_list.empty()) throw std::invalid_argument("N needs at least one antenna count");
    if (groups < 1) throw std::invalid_argument("G must be >= 1");
    if (static_cast<int>(group_sizes.size()) != groups)
        throw std::invalid_argument("K must list one size per group");
    for (int k : group_sizes)
        if (k < 1) throw std::invalid_argument("every group needs at least one UE");
    for (int n : n_list)
        if (n < groups) throw std::invalid_argument("every N must be >= G");
    if (n_paths < 1) throw std::invalid_argument("L must be >= 1");
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    if (n_rand < 1) throw std::invalid_argument("n_rand must be >= 1");
    if (bits_list.empty()) throw std::invalid_argument("bits needs at least one entry");
    if (problem == Problem::MMF && !(power_budget > 0.0))
        throw std::invalid_argument("power must be > 0");
    if (problem == Problem::QoS && !(sinr_target > 0.0))
        throw std::invalid_argument("sinr_target must be > 0");
    if (!(spacing_ratio > 0.0)) throw std::invalid_argument("spacing must be > 0");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise must be > 0");
}

SystemConfig ExperimentSpec::system(int n_antennas) const {
    SystemConfig c;
    c.n_antennas = n_antennas;
    c.groups = groups;
    c.group_sizes = group_sizes;
    c.n_paths = n_paths;
    c.spacing_ratio = spacing_ratio;
    c.noise_power = noise_power;
    return c;
}

ExperimentSpec parse_experiment_spec(std::istream& is, const std::string& source) {
    ExperimentSpec spec;
    std::set<std::string> seen;
    std::vector<int> k_values;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ParseError(source, line_no, key + ": missing value");
        if (!seen.insert(key).second) throw ParseError(source, line_no, key + ": duplicate key");
        try {
            if (key == "name") spec.name = value;
            else if (key == "problem") spec.problem = parse_problem(value);
            else if (key == "N") spec.n_list = parse_int_list(value);
            else if (key == "G") spec.groups = parse_number<int>(value, "an integer");
            else if (key == "K") k_values = parse_int_list(value);
            else if (key == "L") spec.n_paths = parse_number<int>(value, "an integer");
            else if (key == "power") spec.power_budget = parse_number<double>(value, "a number");
            else if (key == "sinr_target") spec.sinr_target = parse_number<double>(value, "a number");
            else if (key == "bits") {
                spec.bits_list.clear();
                for (const auto& t : split(value, ',')) spec.bits_list.push_back(parse_bits(t));
            }
            else if (key == "n_realizations") spec.n_realizations = parse_number<int>(value, "an integer");
            else if (key == "n_rand") spec.n_rand = parse_number<int>(value, "an integer");
            else if (key == "base_seed") spec.base_seed = parse_number<std::uint64_t>(value, "an unsigned integer");
            else if (key == "family") spec.family = parse_phase_family(value);
            else if (key == "rho_mode") spec.rho_mode = parse_rho_mode(value);
            else if (key == "spacing") spec.spacing_ratio = parse_number<double>(value, "a number");
            else if (key == "noise") spec.noise_power = parse_number<double>(value, "a number");
            else throw std::invalid_argument("unknown key");
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, key + ": " + e.what());
        }
    }
    for (const char* required : {"name", "problem", "N", "G", "K"})
        if (!seen.count(required))
            throw ParseError(source, line_no, std::string(required) + ": required key missing");
    if (k_values.size() == 1 && spec.groups > 1) k_values.assign(spec.groups, k_values.front());
    spec.group_sizes = k_values;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, line_no, e.what());
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    return parse_experiment_spec(is, path.string());
}

std::uint64_t realization_seed(std::uint64_t base_seed, int n_antennas, int realization) {
    return base_seed ^ mix_seed(static_cast<std::uint64_t>(n_antennas),
                                static_cast<std::uint64_t>(realization));
}

std::uint64_t randomization_seed(std::uint64_t channel_seed) {
    return mix_seed(channel_seed, kRandomizationStream);
}

RealizationOutcome run_realization(const ExperimentSpec& spec, int n_antennas, int realization) {
    RealizationOutcome out;
    out.seed = realization_seed(spec.base_seed, n_antennas, realization);
    const SystemConfig config = spec.system(n_antennas);
    const ChannelSet channels = generate_channels(config, out.seed);
    const double noise = spec.noise_power;
    const SinrTargets targets = uniform_targets(config, spec.sinr_target);

    auto record = [&](PrecoderKind kind, const std::optional<int>& bits, Metric metric,
                      double value, bool infeasible) {
        ResultRecord r;
        r.experiment_id = spec.name;
        r.seed = out.seed;
        r.N = n_antennas;
        r.G = spec.groups;
        r.total_K = config.total_ues();
        r.L = spec.n_paths;
        r.bits = bits;
        r.problem = spec.problem;
        r.precoder_kind = kind;
        r.metric = metric;
        r.value = infeasible ? std::numeric_limits<double>::quiet_NaN() : value;
        r.infeasible = infeasible;
        out.records.push_back(std::move(r));
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto flag_all = [&](PrecoderKind kind, const std::optional<int>& bits, bool with_ratio) {
        record(kind, bits, Metric::MinSinr, nan, true);
        record(kind, bits, Metric::TotalPowerWatts, nan, true);
        if (with_ratio) record(kind, bits, Metric::RatioToFd, nan, true);
    };

    DesignOptions design;
    design.n_rand = spec.n_rand;
    design.seed = randomization_seed(out.seed);
    try {
        if (spec.problem == Problem::QoS)
            out.fd = solve_qos(channels, targets, noise, design).precoder;
        else
            out.fd = solve_mmf(channels, spec.power_budget, noise, design).precoder;
    } catch (const InfeasibleError&) {
        out.fd_infeasible = true;
    }
    if (out.fd_infeasible) {
        flag_all(PrecoderKind::FD, std::nullopt, false);
        for (const auto& b : spec.bits_list)
            flag_all(b ? PrecoderKind::HybridQuantized : PrecoderKind::Hybrid, b, true);
        return out;
    }

    const CMatrix& w_fd = out.fd.weights;
    const double fd_sinr = min_sinr(channels, w_fd, noise);
    const double fd_power = total_power(w_fd);
    record(PrecoderKind::FD, std::nullopt, Metric::MinSinr, fd_sinr, false);
    record(PrecoderKind::FD, std::nullopt, Metric::TotalPowerWatts, fd_power, false);

    DecomposeOptions dopt;
    dopt.family = spec.family;
    dopt.rho_mode = spec.rho_mode;
    out.hybrid = decompose(w_fd, dopt);
    out.n_rf = out.hybrid.n_rf;

    const Metric ratio_base = spec.problem == Problem::MMF ? Metric::MinSinr : Metric::TotalPowerWatts;
    const double fd_base = ratio_base == Metric::MinSinr ? fd_sinr : fd_power;
    for (const auto& bits : spec.bits_list) {
        const PrecoderKind kind = bits ? PrecoderKind::HybridQuantized : PrecoderKind::Hybrid;
        CMatrix w = reconstruct(quantize_phases(out.hybrid, QuantizationConfig{bits}));
        if (bits) {
            const CMatrix directions = unit_columns(w);
            const GainTable gains = compute_gains(channels, directions);
            RVector p;
            if (spec.problem == Problem::QoS) {
                const PowerAllocation pc = power_control_qos(gains, targets, noise);
                if (!pc.converged) {
                    flag_all(kind, bits, true);
                    continue;
                }
                p = pc.p;
            } else {
                p = power_control_mmf(gains, spec.power_budget, noise).allocation.p;
            }
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                w.col(j) = directions.col(j) * std::sqrt(std::max(p[j], 0.0));
        }
        const double s = min_sinr(channels, w, noise);
        const double pw = total_power(w);
        record(kind, bits, Metric::MinSinr, s, false);
        record(kind, bits, Metric::TotalPowerWatts, pw, false);
        const auto ratio = performance_ratio(ratio_base == Metric::MinSinr ? s : pw, fd_base, ratio_base);
        record(kind, bits, Metric::RatioToFd, ratio.value_or(nan), !ratio.has_value());
    }
    return out;
}

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec, Execution execution) {
    spec.validate();
    struct Job {
        int n;
        int r;
    };
    std::vector<Job> jobs;
    for (int n : spec.n_list)
        for (int r = 0; r < spec.n_realizations; ++r) jobs.push_back({n, r});
    std::vector<std::vector<ResultRecord>> slots(jobs.size());
    const long count = static_cast<long>(jobs.size());
    auto work = [&](long i) { slots[i] = run_realization(spec, jobs[i].n, jobs[i].r).records; };
#ifdef _OPENMP
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
        for (long i = 0; i < count; ++i) work(i);
    } else {
        for (long i = 0; i < count; ++i) work(i);
    }
#else
    (void)execution;
    for (long i = 0; i < count; ++i) work(i);
#endif
    std::vector<ResultRecord> out;
    for (auto& s : slots)
        for (auto& r : s) out.push_back(std::move(r));
    sort_records(out);
    return out;
}

void sort_records(std::vector<ResultRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        return std::make_tuple(a.N, a.seed, std::string(to_string(a.precoder_kind)), bits_order(a.bits),
                               std::string(to_string(a.metric))) <
               std::make_tuple(b.N, b.seed, std::string(to_string(b.precoder_kind)), bits_order(b.bits),
                               std::string(to_string(b.metric)));
    });
}

void write_csv(std::ostream& os, std::vector<ResultRecord> records) {
    sort_records(records);
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        os << r.experiment_id << ',' << r.seed << ',' << r.N << ',' << r.G << ',' << r.total_K << ','
           << r.L << ',' << format_bits(r.bits) << ',' << to_string(r.problem) << ','
           << to_string(r.precoder_kind) << ',' << to_string(r.metric) << ','
           << format_value(r.value) << ',' << (r.infeasible ? 1 : 0) << '\n';
    }
}

void emit_csv(const std::vector<ResultRecord>& records, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_csv(os, records);
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<ResultRecord> read_csv(std::istream& is, const std::string& source) {
    std::string line;
    int line_no = 1;
    if (!std::getline(is, line) || trim(line) != kCsvHeader)
        throw ParseError(source, line_no, "missing or unexpected CSV header");
    std::vector<ResultRecord> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (f.size() != 12) throw ParseError(source, line_no, "expected 12 fields");
        try {
            ResultRecord r;
            r.experiment_id = f[0];
            r.seed = parse_number<std::uint64_t>(f[1], "a seed");
            r.N = parse_number<int>(f[2], "N");
            r.G = parse_number<int>(f[3], "G");
            r.total_K = parse_number<int>(f[4], "total_K");
            r.L = parse_number<int>(f[5], "L");
            r.bits = parse_bits(f[6]);
            r.problem = parse_problem(f[7]);
            r.precoder_kind = parse_precoder_kind(f[8]);
            r.metric = parse_metric(f[9]);
            r.value = f[10] == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                     : parse_number<double>(f[10], "a value");
            if (f[11] != "0" && f[11] != "1") throw std::invalid_argument("infeasible must be 0 or 1");
            r.infeasible = f[11] == "1";
            out.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    return out;
}

std::vector<ResultRecord> load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_csv(is, path.string());
}

void write_report(std::ostream& os, const std::vector<ResultRecord>& records) {
    os << "# aggregate\n";
    os << "experiment_id,problem,N,precoder_kind,bits,metric_name,count,infeasible_count,mean\n";
    for (const auto& a : aggregate(records)) {
        os << a.experiment_id << ',' << to_string(a.problem) << ',' << a.N << ','
           << to_string(a.precoder_kind) << ',' << format_bits(a.bits) << ',' << to_string(a.metric)
           << ',' << a.count << ',' << a.infeasible_count << ',' << format_value(a.mean) << '\n';
    }
    os << "# performance\n";
    os << "experiment_id,N,precoder_kind,bits,base_metric,ratio_of_means,mean_of_ratios,count\n";
    for (const auto& p : performance_table(records)) {
        os << p.experiment_id << ',' << p.N << ',' << to_string(p.precoder_kind) << ','
           << format_bits(p.bits) << ',' << to_string(p.base_metric) << ','
           << format_value(p.ratio_of_means) << ',' << format_value(p.mean_of_ratios) << ','
           << p.count << '\n';
    }
}

} // namespace mhp
