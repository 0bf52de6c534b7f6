// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mhp/channel_model.hpp"
#include "mhp/random.hpp"

namespace mhp::fixtures {

inline CMatrix random_matrix(int rows, int cols, Rng& rng) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

inline SystemConfig config(int n, std::vector<int> sizes, int paths = 3) {
    SystemConfig c;
    c.n_antennas = n;
    c.groups = static_cast<int>(sizes.size());
    c.group_sizes = std::move(sizes);
    c.n_paths = paths;
    return c;
}

// Channel set with i.i.d. CN(0, I) vectors instead of the geometric model.
inline ChannelSet iid_channels(int n, std::vector<int> sizes, std::uint64_t seed) {
    const SystemConfig c = config(n, sizes);
    ChannelSet ch(c, seed);
    Rng rng(seed);
    for (int j = 0; j < c.groups; ++j)
        for (int k = 0; k < c.group_sizes[j]; ++k) ch.set(j, k, random_matrix(n, 1, rng).col(0));
    return ch;
}

} // namespace mhp::fixtures
