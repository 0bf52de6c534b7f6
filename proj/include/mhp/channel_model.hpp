// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mhp/linalg.hpp"

namespace mhp {

/// Dimensions of a single-cell multi-group multicast downlink.
/// UEs are addressed by (group, index-in-group), so group membership is
/// disjoint by construction.
struct SystemConfig {
    int n_antennas = 1;
    int groups = 1;
    std::vector<int> group_sizes{1};
    int n_paths = 1;
    double spacing_ratio = 0.5;  ///< antenna spacing over wavelength
    double noise_power = 1.0;    ///< Watts

    int total_ues() const;
    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Per-UE channel vectors h_jk (length N), indexed [group][ue].
class ChannelSet {
public:
    ChannelSet() = default;
    ChannelSet(SystemConfig config, std::uint64_t seed);

    const SystemConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }
    int n_antennas() const noexcept { return config_.n_antennas; }
    int groups() const noexcept { return config_.groups; }
    int group_size(int j) const { return config_.group_sizes.at(j); }

    const CVector& h(int j, int k) const { return channels_.at(j).at(k); }
    /// Replaces h_jk; the vector must have length N.
    void set(int j, int k, CVector h);

    bool operator==(const ChannelSet& other) const;

private:
    SystemConfig config_;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<CVector>> channels_;
};

/// ULA response a(phi): entry n is exp(i*2*pi*spacing_ratio*n*sin(phi)) / sqrt(N).
CVector array_response(double phi, int n_antennas, double spacing_ratio);

/// One propagation path: complex gain and azimuth.
struct PathDraw {
    cdouble gain;
    double azimuth;
};

/// h = sqrt(N/L) * sum_l conj(gain_l) * a(azimuth_l), i.e. the conjugate
/// transpose of the geometric model h^H = sqrt(N/L) sum_l gain_l a^H(azimuth_l).
CVector channel_from_paths(std::span<const PathDraw> paths, int n_antennas, double spacing_ratio);

/// Draws every UE channel from the geometric model. Gains are CN(0,1),
/// azimuths uniform on [0, 2*pi). Randomness is consumed group-major, then UE,
/// then path; per path the gain (re, im) is drawn before the azimuth.
ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed);

} // namespace mhp
