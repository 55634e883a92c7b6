// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfisac/linalg.hpp"

namespace cfisac {

struct HermitianEigResult {
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // unitary, columns match eigenvalues
};

// Full spectral decomposition of a Hermitian matrix (symmetrized first).
// Each eigenvector is rotated so its largest-magnitude entry is real positive.
// Throws std::invalid_argument on non-finite input.
HermitianEigResult hermitian_eig(const CMat& A);

// (c c^H + sigma2 I)^{-1} X by Sherman-Morrison. Throws unless sigma2 > 0.
CMat rank_one_plus_identity_inverse_apply(const CVec& c, double sigma2, const CMat& X);

// Principal eigenvector of R^{-1} V V^H with R = c c^H + sigma2 I, computed
// from the B x B matrix V^H R^{-1} V instead of the n x n product. Returns a
// unit-norm vector; maximizes u^H V V^H u / u^H R u over all u != 0.
CVec principal_generalized_direction(const CMat& V, const CVec& c, double sigma2);

}  // namespace cfisac
