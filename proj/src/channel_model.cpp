// SPDX-License-Identifier: Apache-2.0
#include "mhp/channel_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mhp/errors.hpp"
#include "mhp/random.hpp"

namespace mhp {

int SystemConfig::total_ues() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), 0);
}

void SystemConfig::validate() const {
    if (n_antennas < 1) throw std::invalid_argument("n_antennas must be >= 1");
    if (groups < 1) throw std::invalid_argument("groups must be >= 1");
    if (static_cast<int>(group_sizes.size()) != groups)
        throw std::invalid_argument("group_sizes must have one entry per group (expected " +
                                    std::to_string(groups) + ", got " +
                                    std::to_string(group_sizes.size()) + ")");
    for (int k : group_sizes)
        if (k < 1) throw std::invalid_argument("every group needs at least one UE");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (!(spacing_ratio > 0.0)) throw std::invalid_argument("spacing_ratio must be > 0");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be > 0");
}

ChannelSet::ChannelSet(SystemConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
    config_.validate();
    channels_.resize(config_.groups);
    for (int j = 0; j < config_.groups; ++j)
        channels_[j].assign(config_.group_sizes[j], CVector::Zero(config_.n_antennas));
}

void ChannelSet::set(int j, int k, CVector h) {
    if (h.size() != config_.n_antennas)
        throw DimensionError("channel length " + std::to_string(h.size()) + " != N = " +
                             std::to_string(config_.n_antennas));
    channels_.at(j).at(k) = std::move(h);
}

bool ChannelSet::operator==(const ChannelSet& other) const {
    if (seed_ != other.seed_ || config_.n_antennas != other.config_.n_antennas ||
        config_.groups != other.config_.groups || config_.group_sizes != other.config_.group_sizes ||
        config_.n_paths != other.config_.n_paths ||
        config_.spacing_ratio != other.config_.spacing_ratio ||
        config_.noise_power != other.config_.noise_power)
        return false;
    for (int j = 0; j < config_.groups; ++j)
        for (int k = 0; k < config_.group_sizes[j]; ++k)
            if (channels_[j][k] != other.channels_[j][k]) return false;
    return true;
}

CVector array_response(double phi, int n_antennas, double spacing_ratio) {
    CVector a(n_antennas);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
    const double step = kTwoPi * spacing_ratio * std::sin(phi);
    for (int n = 0; n < n_antennas; ++n)
        a[n] = scale * std::polar(1.0, step * n);
    return a;
}

CVector channel_from_paths(std::span<const PathDraw> paths, int n_antennas, double spacing_ratio) {
    CVector h = CVector::Zero(n_antennas);
    for (const auto& p : paths)
        h += std::conj(p.gain) * array_response(p.azimuth, n_antennas, spacing_ratio);
    const double scale =
        std::sqrt(static_cast<double>(n_antennas) / static_cast<double>(paths.size()));
    return scale * h;
}

ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed) {
    ChannelSet out(config, seed);
    Rng rng(seed);
    std::vector<PathDraw> paths(config.n_paths);
    for (int j = 0; j < config.groups; ++j) {
        for (int k = 0; k < config.group_sizes[j]; ++k) {
            for (auto& p : paths) {
                p.gain = rng.complex_normal();
                p.azimuth = rng.uniform(0.0, kTwoPi);
            }
            out.set(j, k, channel_from_paths(paths, config.n_antennas, config.spacing_ratio));
        }
    }
    return out;
}

} // namespace mhp
