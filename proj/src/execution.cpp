// SPDX-License-Identifier: Apache-2.0
#include "mhp/execution.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhp {

int worker_count() {
    int fallback = 1;
#ifdef _OPENMP
    fallback = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("MHP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return fallback;
}

} // namespace mhp
