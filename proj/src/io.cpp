// SPDX-License-Identifier: Apache-2.0
#include "mhp/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "mhp/errors.hpp"

namespace mhp {

namespace {

constexpr int kDigits = 17;

/// Line-oriented tokenizer that remembers where it is for diagnostics.
class LineReader {
public:
    LineReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

    /// Next meaningful line split on whitespace; throws at end of input.
    std::vector<std::string> next(const char* expecting) {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            std::string t;
            while (ss >> t) tokens.push_back(t);
            if (tokens.empty() || tokens.front().starts_with('#')) continue;
            return tokens;
        }
        fail(std::string("unexpected end of input, expected ") + expecting);
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

    double real(const std::string& token) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            fail("not a number: '" + token + "'");
        return v;
    }

    template <typename Int>
    Int integer(const std::string& token) const {
        Int v{};
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            fail("not an integer: '" + token + "'");
        return v;
    }

    /// Expects "<key> <value...>" and returns the values.
    std::vector<std::string> keyed(const std::string& key, std::size_t min_values = 1) {
        auto t = next(key.c_str());
        if (t.front() != key) fail("expected '" + key + "', found '" + t.front() + "'");
        if (t.size() < 1 + min_values) fail("'" + key + "' needs a value");
        t.erase(t.begin());
        return t;
    }

    int positive(const std::string& key) {
        const auto v = keyed(key);
        const int n = integer<int>(v.front());
        if (n < 1) fail("'" + key + "' must be positive");
        return n;
    }

    void header(const std::string& magic) {
        const auto t = next(magic.c_str());
        if (t.size() != 2 || t[0] != magic || t[1] != "1")
            fail("expected header '" + magic + " 1'");
    }

private:
    std::istream& is_;
    std::string source_;
    int line_ = 0;
};

void write_real(std::ostream& os, double v) {
    os << std::setprecision(kDigits) << v;
}

template <typename Stream>
Stream open_or_throw(const std::filesystem::path& path) {
    Stream s(path);
    if (!s) throw std::runtime_error("cannot open '" + path.string() + "'");
    return s;
}

void finish_write(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace

std::string format_bits(const std::optional<int>& bits) {
    return bits ? std::to_string(*bits) : std::string("inf");
}

std::optional<int> parse_bits(const std::string& s) {
    if (s == "inf" || s == "infinite" || s == "Infinite") return std::nullopt;
    int b = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), b);
    if (ec != std::errc{} || ptr != s.data() + s.size() || b < 1)
        throw std::invalid_argument("bits must be a positive integer or 'inf', got '" + s + "'");
    return b;
}

void write_channels(std::ostream& os, const ChannelSet& channels) {
    const SystemConfig& c = channels.config();
    os << "mhp-channels 1\n";
    os << "N " << c.n_antennas << "\nG " << c.groups << "\nK";
    for (int k : c.group_sizes) os << ' ' << k;
    os << "\nL " << c.n_paths << "\nspacing ";
    write_real(os, c.spacing_ratio);
    os << "\nnoise ";
    write_real(os, c.noise_power);
    os << "\nseed " << channels.seed() << '\n';
    for (int j = 0; j < c.groups; ++j) {
        for (int k = 0; k < c.group_sizes[j]; ++k) {
            os << "h " << j << ' ' << k;
            for (const cdouble& v : channels.h(j, k)) {
                os << ' ';
                write_real(os, v.real());
                os << ' ';
                write_real(os, v.imag());
            }
            os << '\n';
        }
    }
}

ChannelSet read_channels(std::istream& is, const std::string& source) {
    LineReader in(is, source);
    in.header("mhp-channels");
    SystemConfig c;
    c.n_antennas = in.positive("N");
    c.groups = in.positive("G");
    const auto ks = in.keyed("K", static_cast<std::size_t>(c.groups));
    if (static_cast<int>(ks.size()) != c.groups) in.fail("'K' needs exactly G values");
    c.group_sizes.clear();
    for (const auto& k : ks) {
        const int v = in.integer<int>(k);
        if (v < 1) in.fail("group sizes must be positive");
        c.group_sizes.push_back(v);
    }
    c.n_paths = in.positive("L");
    c.spacing_ratio = in.real(in.keyed("spacing").front());
    c.noise_power = in.real(in.keyed("noise").front());
    const auto seed = in.integer<std::uint64_t>(in.keyed("seed").front());
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        in.fail(e.what());
    }
    ChannelSet out(c, seed);
    for (int j = 0; j < c.groups; ++j) {
        for (int k = 0; k < c.group_sizes[j]; ++k) {
            const auto t = in.keyed("h", 2);
            if (t.size() != 2 + 2 * static_cast<std::size_t>(c.n_antennas))
                in.fail("channel row needs j, k and N (re, im) pairs");
            if (in.integer<int>(t[0]) != j || in.integer<int>(t[1]) != k)
                in.fail("channel rows must be ordered group-major (expected " + std::to_string(j) +
                        " " + std::to_string(k) + ")");
            CVector h(c.n_antennas);
            for (int n = 0; n < c.n_antennas; ++n)
                h[n] = {in.real(t[2 + 2 * n]), in.real(t[3 + 2 * n])};
            out.set(j, k, std::move(h));
        }
    }
    return out;
}

void write_precoder(std::ostream& os, const FdPrecoder& precoder) {
    const CMatrix& w = precoder.weights;
    os << "mhp-precoder 1\nN " << w.rows() << "\nG " << w.cols() << '\n';
    for (Eigen::Index n = 0; n < w.rows(); ++n) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (j) os << ' ';
            write_real(os, w(n, j).real());
            os << ' ';
            write_real(os, w(n, j).imag());
        }
        os << '\n';
    }
}

FdPrecoder read_precoder(std::istream& is, const std::string& source) {
    LineReader in(is, source);
    in.header("mhp-precoder");
    const int N = in.positive("N");
    const int G = in.positive("G");
    FdPrecoder out;
    out.weights.resize(N, G);
    for (int n = 0; n < N; ++n) {
        const auto t = in.next("precoder row");
        if (t.size() != 2 * static_cast<std::size_t>(G)) in.fail("precoder row needs G (re, im) pairs");
        for (int j = 0; j < G; ++j) out.weights(n, j) = {in.real(t[2 * j]), in.real(t[2 * j + 1])};
    }
    return out;
}

void write_hybrid(std::ostream& os, const HybridPrecoder& h) {
    os << "mhp-hybrid 1\nN " << h.n_antennas() << "\nn_rf " << h.n_rf << "\nG " << h.groups()
       << "\nfamily " << to_string(h.family) << "\nbits " << format_bits(h.quantization.bits)
       << '\n';
    auto phases = [&](const char* name, const RMatrix& m) {
        os << name << '\n';
        for (Eigen::Index n = 0; n < m.rows(); ++n) {
            for (Eigen::Index r = 0; r < m.cols(); ++r) {
                if (r) os << ' ';
                write_real(os, m(n, r));
            }
            os << '\n';
        }
    };
    phases("phases_a", h.phases_a);
    phases("phases_b", h.phases_b);
    os << "digital\n";
    for (Eigen::Index r = 0; r < h.digital.rows(); ++r) {
        for (Eigen::Index j = 0; j < h.digital.cols(); ++j) {
            if (j) os << ' ';
            write_real(os, h.digital(r, j).real());
            os << ' ';
            write_real(os, h.digital(r, j).imag());
        }
        os << '\n';
    }
}

HybridPrecoder read_hybrid(std::istream& is, const std::string& source) {
    LineReader in(is, source);
    in.header("mhp-hybrid");
    HybridPrecoder h;
    const int N = in.positive("N");
    h.n_rf = in.positive("n_rf");
    const int G = in.positive("G");
    try {
        h.family = parse_phase_family(in.keyed("family").front());
        h.quantization.bits = parse_bits(in.keyed("bits").front());
    } catch (const std::invalid_argument& e) {
        in.fail(e.what());
    }
    auto phases = [&](const char* name, RMatrix& m) {
        const auto t = in.next(name);
        if (t.size() != 1 || t.front() != name) in.fail(std::string("expected '") + name + "'");
        m.resize(N, h.n_rf);
        for (int n = 0; n < N; ++n) {
            const auto row = in.next("phase row");
            if (row.size() != static_cast<std::size_t>(h.n_rf)) in.fail("phase row needs n_rf values");
            for (int r = 0; r < h.n_rf; ++r) m(n, r) = in.real(row[r]);
        }
    };
    phases("phases_a", h.phases_a);
    phases("phases_b", h.phases_b);
    const auto t = in.next("digital");
    if (t.size() != 1 || t.front() != "digital") in.fail("expected 'digital'");
    h.digital.resize(h.n_rf, G);
    for (int r = 0; r < h.n_rf; ++r) {
        const auto row = in.next("digital row");
        if (row.size() != 2 * static_cast<std::size_t>(G)) in.fail("digital row needs G (re, im) pairs");
        for (int j = 0; j < G; ++j) h.digital(r, j) = {in.real(row[2 * j]), in.real(row[2 * j + 1])};
    }
    return h;
}

void save_channels(const std::filesystem::path& path, const ChannelSet& channels) {
    auto os = open_or_throw<std::ofstream>(path);
    write_channels(os, channels);
    finish_write(os, path);
}

ChannelSet load_channels(const std::filesystem::path& path) {
    auto is = open_or_throw<std::ifstream>(path);
    return read_channels(is, path.string());
}

void save_precoder(const std::filesystem::path& path, const FdPrecoder& precoder) {
    auto os = open_or_throw<std::ofstream>(path);
    write_precoder(os, precoder);
    finish_write(os, path);
}

FdPrecoder load_precoder(const std::filesystem::path& path) {
    auto is = open_or_throw<std::ifstream>(path);
    return read_precoder(is, path.string());
}

void save_hybrid(const std::filesystem::path& path, const HybridPrecoder& hybrid) {
    auto os = open_or_throw<std::ofstream>(path);
    write_hybrid(os, hybrid);
    finish_write(os, path);
}

HybridPrecoder load_hybrid(const std::filesystem::path& path) {
    auto is = open_or_throw<std::ifstream>(path);
    return read_hybrid(is, path.string());
}

} // namespace mhp
