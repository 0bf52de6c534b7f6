// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "mhp/linalg.hpp"

namespace mhp {

/// Real standard-form conic program
///
///     minimize  c'x   subject to  A x = b,  x in K
///
/// where K is a product of symmetric PSD cones (one per entry of
/// `block_sizes`, each stored as its full column-major d*d vectorization)
/// followed by a nonnegative orthant of dimension `n_nonneg`.
/// PSD-block parts of every row of A and of c must be symmetric.
struct SdpProblem {
    std::vector<int> block_sizes;
    int n_nonneg = 0;
    RMatrix A;
    RVector b;
    RVector c;

    Eigen::Index n_vars() const;
    Eigen::Index n_constraints() const { return A.rows(); }
    /// Offset of PSD block `i` inside x.
    Eigen::Index block_offset(int i) const;
    Eigen::Index nonneg_offset() const;
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(SdpStatus s);

struct SdpSettings {
    int max_iterations = 50000;
    double tolerance = 1e-7;      ///< relative primal and dual residuals
    double gap_tolerance = 1e-6;  ///< relative duality gap
    double initial_penalty = 1.0;
    /// Anderson acceleration memory; 0 runs the plain splitting iteration.
    int anderson_memory = 20;
    /// When set, one line "iter,primal_res,dual_res,objective" is written
    /// every `log_every` iterations.
    std::ostream* log = nullptr;
    int log_every = 100;
};

struct SdpResult {
    RVector x;
    RVector y;
    double objective = 0.0;       ///< c'x
    double dual_objective = 0.0;  ///< b'y
    SdpStatus status = SdpStatus::MaxIterations;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Alternating-direction augmented Lagrangian method on the dual
/// (Wen, Goldfarb & Yin), run as a fixed-point iteration v <- T(v) with
/// s = P_K(v), x = P_K(-v)/mu. Each evaluation of T solves a normal equation
/// with the pre-factored A A' and eigendecomposes every PSD block. Steps are
/// Anderson-accelerated (type II) and an accelerated step is kept only if it
/// shrinks the fixed-point residual. The penalty mu is rebalanced at
/// geometrically spaced iterations only. Infeasibility is declared once the
/// dual iterate diverges along an approximate Farkas ray y with b'y > 0 and
/// A'y in -K.
SdpResult solve_sdp(const SdpProblem& problem, const SdpSettings& settings = {});

} // namespace mhp
