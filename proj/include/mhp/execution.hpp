// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace mhp {

/// Selects the serial reference loop or the OpenMP kernel. Both produce
/// bit-identical results; the serial path is kept as the testing oracle.
enum class Execution { Serial, Parallel };

/// Worker count for parallel kernels: MHP_THREADS when set to a positive
/// integer, otherwise the OpenMP default (1 without OpenMP).
int worker_count();

} // namespace mhp
