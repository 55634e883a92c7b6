// SPDX-License-Identifier: Apache-2.0
#include "cfisac/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cfisac {

HermitianEigResult hermitian_eig(const CMat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("hermitian_eig: matrix is not square");
  if (!A.allFinite()) throw std::invalid_argument("hermitian_eig: non-finite entries");
  const CMat sym = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: no convergence");

  HermitianEigResult out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) {
    auto v = out.eigenvectors.col(j);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const cd pivot = v[imax];
    if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    v[imax] = std::abs(v[imax]);
  }
  return out;
}

CMat rank_one_plus_identity_inverse_apply(const CVec& c, double sigma2, const CMat& X) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("rank_one_plus_identity_inverse_apply: sigma2 must be > 0");
  }
  const cd denom = sigma2 + c.squaredNorm();
  return (X - c * (c.adjoint() * X) / denom) / sigma2;
}

CVec principal_generalized_direction(const CMat& V, const CVec& c, double sigma2) {
  if (!(V.norm() > std::numeric_limits<double>::min())) {
    throw std::invalid_argument("principal_generalized_direction: no target response");
  }
  // Scale out the magnitudes so R^{-1} stays well inside double range; the
  // direction is invariant to positive scaling of V and of R.
  const double v_scale = V.cwiseAbs().maxCoeff();
  const CMat Vs = V / v_scale;
  const CVec cs = c / v_scale;
  const double s2 = sigma2 / (v_scale * v_scale);

  const CMat RinvV = rank_one_plus_identity_inverse_apply(cs, s2, Vs);
  const CMat reduced = Vs.adjoint() * RinvV;
  const HermitianEigResult eig = hermitian_eig(reduced);
  const CVec z = eig.eigenvectors.col(eig.eigenvectors.cols() - 1);
  CVec u = RinvV * z;
  return u / u.norm();
}

}  // namespace cfisac
