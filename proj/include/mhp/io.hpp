// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mhp/channel_model.hpp"
#include "mhp/fd_design.hpp"
#include "mhp/hybrid.hpp"

namespace mhp {

// Text matrix formats. All reals are written with 17 significant digits so
// that reading them back is exact. Blank lines and lines starting with '#'
// are ignored on input.
//
// Channel set:
//   mhp-channels 1
//   N <int>
//   G <int>
//   K <K_1> ... <K_G>
//   L <int>
//   spacing <real>
//   noise <real>
//   seed <uint64>
//   h <j> <k> <re_0> <im_0> ... <re_{N-1}> <im_{N-1}>     (one line per UE, group-major)
//
// FD precoder:
//   mhp-precoder 1
//   N <int>
//   G <int>
//   <re_n1> <im_n1> ... <re_nG> <im_nG>                   (N rows)
//
// Hybrid precoder:
//   mhp-hybrid 1
//   N <int>
//   n_rf <int>
//   G <int>
//   family primary|alternate
//   bits <int>|inf
//   phases_a
//   <N rows of n_rf phases>
//   phases_b
//   <N rows of n_rf phases>
//   digital
//   <n_rf rows of G (re, im) pairs>

void write_channels(std::ostream& os, const ChannelSet& channels);
ChannelSet read_channels(std::istream& is, const std::string& source = "<stream>");

void write_precoder(std::ostream& os, const FdPrecoder& precoder);
FdPrecoder read_precoder(std::istream& is, const std::string& source = "<stream>");

void write_hybrid(std::ostream& os, const HybridPrecoder& hybrid);
HybridPrecoder read_hybrid(std::istream& is, const std::string& source = "<stream>");

// File wrappers; I/O failures throw std::runtime_error naming the path.
void save_channels(const std::filesystem::path& path, const ChannelSet& channels);
ChannelSet load_channels(const std::filesystem::path& path);
void save_precoder(const std::filesystem::path& path, const FdPrecoder& precoder);
FdPrecoder load_precoder(const std::filesystem::path& path);
void save_hybrid(const std::filesystem::path& path, const HybridPrecoder& hybrid);
HybridPrecoder load_hybrid(const std::filesystem::path& path);

/// "inf" or the decimal bit count.
std::string format_bits(const std::optional<int>& bits);
/// Accepts "inf" / "infinite" or a positive integer.
std::optional<int> parse_bits(const std::string& s);

} // namespace mhp
