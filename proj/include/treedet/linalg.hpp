#pragma once

#include "treedet/types.hpp"

namespace treedet {

struct QrThin {
  CMat q;  // L x N, orthonormal columns
  CMat r;  // N x N upper triangular, real non-negative diagonal
};

// Thin QR of an L x N matrix (L >= N). The diagonal of R is forced real and
// non-negative by a unit-phase pass so that tree-search levels see a
// consistently signed triangular system. Throws RankDeficientError when a
// diagonal entry falls below 1e-12 of the largest one.
QrThin thin_qr(const CMat& h);

// Solves A X = B for hermitian positive definite A via Cholesky.
// Throws NotPositiveDefiniteError when the factorization fails.
CMat hermitian_solve(const CMat& a, const CMat& b);

}  // namespace treedet
