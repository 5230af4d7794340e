/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

// Every numerical tolerance used by the library lives here so that the
// operations and their tests agree on the same thresholds.

namespace ctrack::tol {

// Cyclic Jacobi: stop once the off-diagonal Frobenius norm drops below
// kJacobiOffDiagonal * max(1, ||A||_F).
inline constexpr double kJacobiOffDiagonal = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

// Input symmetry accepted for adjacency matrices.
inline constexpr double kAdjacencySymmetry = 1e-12;

// A Laplacian with lambda_2 at or below this value is treated as disconnected.
inline constexpr double kConnectivity = 1e-8;

// Allowed deviation from unit norm for bearing vectors.
inline constexpr double kUnitNorm = 1e-9;

// Any state component above this magnitude aborts a simulation.
inline constexpr double kDivergence = 1e9;

// Eigenvector components below this magnitude are skipped by the sign
// convention (first nonzero component positive).
inline constexpr double kSignConvention = 1e-12;

}  // namespace ctrack::tol
