// SPDX-License-Identifier: Apache-2.0
#include "cfisac/cone.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace cfisac::cone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  ConeKind kind;
  int offset;  // into the conic (non-zero-cone) rows
  int dim;
};

// Product of nonnegative orthants and second-order cones, on the stacked
// conic slack vector.
class ConeSpace {
 public:
  explicit ConeSpace(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (const Block& k : blocks_) {
      dim_ += k.dim;
      degree_ += k.kind == ConeKind::NonNegative ? k.dim : 1;
    }
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  int dim() const { return dim_; }
  int degree() const { return degree_; }

  // Smallest "eigenvalue": min entry on orthants, u0 - ||u1|| on SOCs.
  double min_margin(const RVec& u) const {
    double m = kInf;
    for (const Block& k : blocks_) {
      if (k.kind == ConeKind::NonNegative) {
        m = std::min(m, u.segment(k.offset, k.dim).minCoeff());
      } else {
        m = std::min(m, u[k.offset] - u.segment(k.offset + 1, k.dim - 1).norm());
      }
    }
    return m;
  }

  void add_identity(RVec& u, double t) const {
    for (const Block& k : blocks_) {
      if (k.kind == ConeKind::NonNegative) {
        u.segment(k.offset, k.dim).array() += t;
      } else {
        u[k.offset] += t;
      }
    }
  }

  RVec identity() const {
    RVec e = RVec::Zero(dim_);
    add_identity(e, 1.0);
    return e;
  }

  // sup { a >= 0 : u + a d in K } for u in the interior.
  double max_step(const RVec& u, const RVec& d) const {
    double alpha = kInf;
    for (const Block& k : blocks_) {
      if (k.kind == ConeKind::NonNegative) {
        for (int i = k.offset; i < k.offset + k.dim; ++i) {
          if (d[i] < 0.0) alpha = std::min(alpha, -u[i] / d[i]);
        }
      } else {
        alpha = std::min(alpha, soc_step(u.segment(k.offset, k.dim), d.segment(k.offset, k.dim)));
      }
    }
    return alpha;
  }

  RVec jordan(const RVec& u, const RVec& v) const {
    RVec out(dim_);
    for (const Block& k : blocks_) {
      const auto a = u.segment(k.offset, k.dim);
      const auto b = v.segment(k.offset, k.dim);
      auto o = out.segment(k.offset, k.dim);
      if (k.kind == ConeKind::NonNegative) {
        o = a.cwiseProduct(b);
      } else {
        o[0] = a.dot(b);
        o.tail(k.dim - 1) = a[0] * b.tail(k.dim - 1) + b[0] * a.tail(k.dim - 1);
      }
    }
    return out;
  }

  // x with lambda o x = d.
  RVec jordan_div(const RVec& lambda, const RVec& d) const {
    RVec out(dim_);
    for (const Block& k : blocks_) {
      const auto l = lambda.segment(k.offset, k.dim);
      const auto r = d.segment(k.offset, k.dim);
      auto o = out.segment(k.offset, k.dim);
      if (k.kind == ConeKind::NonNegative) {
        o = r.cwiseQuotient(l);
      } else {
        const double l0 = l[0];
        const auto l1 = l.tail(k.dim - 1);
        const double det = (l0 - l1.norm()) * (l0 + l1.norm());
        const double x0 = (l0 * r[0] - l1.dot(r.tail(k.dim - 1))) / det;
        o[0] = x0;
        o.tail(k.dim - 1) = (r.tail(k.dim - 1) - x0 * l1) / l0;
      }
    }
    return out;
  }

 private:
  template <typename Seg>
  static double soc_step(const Seg& u, const Seg& d) {
    const Eigen::Index n = u.size() - 1;
    const double u1n = u.tail(n).norm();
    const double c = (u[0] - u1n) * (u[0] + u1n);
    const double b = u[0] * d[0] - u.tail(n).dot(d.tail(n));
    const double d1n = d.tail(n).norm();
    const double a = (d[0] - d1n) * (d[0] + d1n);
    // roots of a t^2 + 2 b t + c, with c > 0
    double best = kInf;
    auto consider = [&](double t) {
      if (t > 0.0 && std::isfinite(t)) best = std::min(best, t);
    };
    if (a == 0.0) {
      if (b < 0.0) consider(-c / (2.0 * b));
      return best;
    }
    const double disc = b * b - a * c;
    if (disc < 0.0) return best;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
      consider(q / a);
      consider(c / q);
    }
    return best;
  }

  std::vector<Block> blocks_;
  int dim_ = 0;
  int degree_ = 0;
};

// Nesterov-Todd scaling W of a pair (s, z): W z = W^{-1} s = lambda.
// SOC blocks use W = beta [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]].
class NtScaling {
 public:
  NtScaling(const ConeSpace& space, const RVec& s, const RVec& z) : space_(&space) {
    nn_.resize(space.dim());
    for (const Block& k : space.blocks()) {
      if (k.kind == ConeKind::NonNegative) {
        nn_.segment(k.offset, k.dim) =
            (s.segment(k.offset, k.dim).array() / z.segment(k.offset, k.dim).array()).sqrt();
        continue;
      }
      const auto sb = s.segment(k.offset, k.dim);
      const auto zb = z.segment(k.offset, k.dim);
      const double sn = soc_norm(sb);
      const double zn = soc_norm(zb);
      const RVec sbar = sb / sn;
      const RVec zbar = zb / zn;
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      RVec w(k.dim);
      w[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
      w.tail(k.dim - 1) = (sbar.tail(k.dim - 1) - zbar.tail(k.dim - 1)) / (2.0 * gamma);
      soc_.push_back({std::sqrt(sn / zn), std::move(w)});
    }
  }

  RVec apply(const RVec& x) const { return transform(x, false); }
  RVec apply_inverse(const RVec& x) const { return transform(x, true); }

  // Dense W^{-2} for conic block i (diagonal for orthants).
  RMat inverse_square(const Block& k, int soc_index) const {
    if (k.kind == ConeKind::NonNegative) {
      const RVec d = nn_.segment(k.offset, k.dim);
      return d.array().square().inverse().matrix().asDiagonal();
    }
    // W^{-1} = (2 a a^T - J) / beta with v = (w + e)/sqrt(2(1 + w0)), a = J v,
    // hence W^{-2} = (I + 4|v|^2 a a^T - 2(a v^T + v a^T)) / beta^2.
    const Soc& sc = soc_[soc_index];
    RVec v = sc.w;
    v[0] += 1.0;
    v /= std::sqrt(2.0 * (1.0 + sc.w[0]));
    RVec a = -v;
    a[0] = v[0];
    RMat M = 4.0 * v.squaredNorm() * a * a.transpose();
    M.noalias() -= 2.0 * (a * v.transpose() + v * a.transpose());
    M.diagonal().array() += 1.0;
    return M / (sc.beta * sc.beta);
  }

 private:
  struct Soc {
    double beta;
    RVec w;
  };

  template <typename Seg>
  static double soc_norm(const Seg& u) {
    const double n1 = u.tail(u.size() - 1).norm();
    return std::sqrt((u[0] - n1) * (u[0] + n1));
  }

  RVec transform(const RVec& x, bool inverse) const {
    RVec out(x.size());
    int si = 0;
    for (const Block& k : space_->blocks()) {
      if (k.kind == ConeKind::NonNegative) {
        const auto d = nn_.segment(k.offset, k.dim);
        if (inverse) {
          out.segment(k.offset, k.dim) = x.segment(k.offset, k.dim).cwiseQuotient(d);
        } else {
          out.segment(k.offset, k.dim) = x.segment(k.offset, k.dim).cwiseProduct(d);
        }
        continue;
      }
      const Soc& sc = soc_[si++];
      const int n = k.dim - 1;
      const double w0 = sc.w[0];
      const auto w1 = sc.w.tail(n);
      const double x0 = x[k.offset];
      const auto x1 = x.segment(k.offset + 1, n);
      const double w1x1 = w1.dot(x1);
      const double sign = inverse ? -1.0 : 1.0;
      const double scale = inverse ? 1.0 / sc.beta : sc.beta;
      out[k.offset] = scale * (w0 * x0 + sign * w1x1);
      out.segment(k.offset + 1, n) = scale * (x1 + (sign * x0 + w1x1 / (1.0 + w0)) * w1);
    }
    return out;
  }

  const ConeSpace* space_;
  RVec nn_;
  std::vector<Soc> soc_;
};

// Reduced KKT system
//     [ G^T W^{-2} G   A^T ] [dx]   [r1]
//     [ A              0   ] [dy] = [r2]
// factored with a small static regularization and cleaned up by iterative
// refinement against the unregularized matrix.
class KktSolver {
 public:
  KktSolver(RMat H, const RMat& Aeq, double reg, int refine) : H_(std::move(H)), Aeq_(Aeq) {
    refine_ = refine;
    const Eigen::Index n = H_.rows();
    const double scale = 1.0 + (n > 0 ? H_.diagonal().cwiseAbs().maxCoeff() : 0.0);
    double delta = reg * scale;
    for (int attempt = 0; attempt < 12; ++attempt) {
      RMat Hr = H_;
      Hr.diagonal().array() += delta;
      llt_.compute(Hr);
      if (llt_.info() == Eigen::Success) break;
      delta = std::max(delta * 100.0, 1e-14 * scale);
    }
    if (llt_.info() != Eigen::Success) throw std::runtime_error("cone: KKT factorization failed");
    delta_ = delta;
    if (Aeq_.rows() > 0) {
      HinvAt_ = llt_.solve(Aeq_.transpose());
      RMat S = Aeq_ * HinvAt_;
      S.diagonal().array() += delta;
      schur_.compute(S);
    }
  }

  std::pair<RVec, RVec> solve(const RVec& r1, const RVec& r2) const {
    auto [x, y] = solve_regularized(r1, r2);
    for (int it = 0; it < refine_; ++it) {
      RVec e1 = r1 - H_ * x;
      RVec e2 = r2;
      if (Aeq_.rows() > 0) {
        e1.noalias() -= Aeq_.transpose() * y;
        e2.noalias() -= Aeq_ * x;
      }
      const auto [dx, dy] = solve_regularized(e1, e2);
      x += dx;
      y += dy;
    }
    return {x, y};
  }

 private:
  std::pair<RVec, RVec> solve_regularized(const RVec& r1, const RVec& r2) const {
    RVec x = llt_.solve(r1);
    if (Aeq_.rows() == 0) return {x, RVec()};
    const RVec y = schur_.solve(Aeq_ * x - r2);
    x.noalias() -= HinvAt_ * y;
    return {x, y};
  }

  RMat H_;
  RMat Aeq_;
  RMat HinvAt_;
  Eigen::LLT<RMat> llt_;
  Eigen::LDLT<RMat> schur_;
  double delta_ = 0.0;
  int refine_ = 0;
};

// The program split into equality rows (zero cones) and conic rows.
struct Split {
  RMat Aeq;            // p x n
  RVec beq;
  SparseMat G;         // m x n
  RVec h;
  std::vector<SparseMat> G_blocks;
  std::vector<int> eq_rows, conic_rows;  // original row indices
  std::vector<Block> blocks;
};

Split split_program(const ConeProgram& prog) {
  Split sp;
  int row = 0;
  int conic_offset = 0;
  for (const ConeBlock& cb : prog.cones) {
    for (int i = 0; i < cb.dim; ++i) {
      (cb.kind == ConeKind::Zero ? sp.eq_rows : sp.conic_rows).push_back(row + i);
    }
    if (cb.kind != ConeKind::Zero) {
      sp.blocks.push_back({cb.kind, conic_offset, cb.dim});
      conic_offset += cb.dim;
    }
    row += cb.dim;
  }
  const int n = prog.num_vars();
  sp.Aeq = RMat::Zero(static_cast<Eigen::Index>(sp.eq_rows.size()), n);
  sp.beq.resize(static_cast<Eigen::Index>(sp.eq_rows.size()));
  for (std::size_t i = 0; i < sp.eq_rows.size(); ++i) {
    const int r = sp.eq_rows[i];
    for (SparseMat::InnerIterator it(prog.A, r); it; ++it) sp.Aeq(i, it.col()) = it.value();
    sp.beq[i] = prog.b[r];
  }
  std::vector<Eigen::Triplet<double>> trip;
  sp.h.resize(static_cast<Eigen::Index>(sp.conic_rows.size()));
  for (std::size_t i = 0; i < sp.conic_rows.size(); ++i) {
    const int r = sp.conic_rows[i];
    for (SparseMat::InnerIterator it(prog.A, r); it; ++it) {
      trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
    }
    sp.h[i] = prog.b[r];
  }
  sp.G.resize(static_cast<Eigen::Index>(sp.conic_rows.size()), n);
  sp.G.setFromTriplets(trip.begin(), trip.end());
  for (const Block& k : sp.blocks) sp.G_blocks.push_back(sp.G.middleRows(k.offset, k.dim));
  return sp;
}

double norm_or_zero(const RVec& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max_iters";
  }
  return "unknown";
}

void ConeProgram::validate() const {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw std::invalid_argument("ConeProgram: A must be length(b) x length(c)");
  }
  long total = 0;
  for (const ConeBlock& k : cones) {
    if (k.dim < (k.kind == ConeKind::SecondOrder ? 1 : 1)) {
      throw std::invalid_argument("ConeProgram: cone dimension must be >= 1");
    }
    total += k.dim;
  }
  if (total != b.size()) throw std::invalid_argument("ConeProgram: cone dims must sum to length(b)");
  if (!c.allFinite() || !b.allFinite()) throw std::invalid_argument("ConeProgram: non-finite data");
  for (int r = 0; r < A.outerSize(); ++r) {
    for (SparseMat::InnerIterator it(A, r); it; ++it) {
      if (!std::isfinite(it.value())) throw std::invalid_argument("ConeProgram: non-finite A");
    }
  }
}

ConeSolution InteriorPointSolver::solve(const ConeProgram& prog,
                                        const SolverSettings& settings) const {
  prog.validate();
  const Split sp = split_program(prog);
  const ConeSpace K(sp.blocks);
  const int n = prog.num_vars();
  const int p = static_cast<int>(sp.eq_rows.size());
  const RVec& c = prog.c;
  const RMat& Aeq = sp.Aeq;
  const RVec& beq = sp.beq;
  const SparseMat& G = sp.G;
  const RVec& h = sp.h;

  const double norm_b = prog.b.norm();
  const double norm_c = c.norm();
  const double resx0 = std::max(1.0, norm_c);
  const double resy0 = std::max(1.0, norm_or_zero(beq));
  const double resz0 = std::max(1.0, norm_or_zero(h));

  auto AeqT_mul = [&](const RVec& y) -> RVec {
    return p ? RVec(Aeq.transpose() * y) : RVec(RVec::Zero(n));
  };
  auto dot_eq = [&](const RVec& a, const RVec& b) { return p ? a.dot(b) : 0.0; };

  // G^T M G summed over blocks, M = W^{-2} per block (identity when unscaled).
  auto assemble_h = [&](const NtScaling* W) {
    RMat H = RMat::Zero(n, n);
    int si = 0;
    for (std::size_t i = 0; i < sp.blocks.size(); ++i) {
      const Block& k = sp.blocks[i];
      const SparseMat& Gi = sp.G_blocks[i];
      if (!W) {
        H.noalias() += RMat(Gi.transpose() * Gi);
        continue;
      }
      const RMat M = W->inverse_square(k, si);
      if (k.kind == ConeKind::SecondOrder) ++si;
      const RMat Y = M * Gi;
      H.noalias() += Gi.transpose() * Y;
    }
    return H;
  };

  // Solves  A^T dy + G^T dz = ax,  -A dx = ay,  -G dx + W^2 dz = az.
  struct Dir {
    RVec x, y, z;
  };
  auto solve_once = [&](const KktSolver& kkt, const NtScaling* W, const RVec& ax, const RVec& ay,
                        const RVec& az) {
    const RVec winv2_az = W ? W->apply_inverse(W->apply_inverse(az)) : az;
    const RVec r1 = ax - G.transpose() * winv2_az;
    const RVec r2 = p ? RVec(-ay) : RVec();
    auto [dx, dy] = kkt.solve(r1, r2);
    const RVec t = az + G * dx;
    RVec dz = W ? W->apply_inverse(W->apply_inverse(t)) : t;
    return Dir{std::move(dx), p ? std::move(dy) : RVec(), std::move(dz)};
  };
  // Iterative refinement on the full system; the reduced solve alone loses
  // accuracy once W becomes badly conditioned near the solution.
  auto solve_reduced = [&](const KktSolver& kkt, const NtScaling* W, const RVec& ax,
                           const RVec& ay, const RVec& az) {
    Dir d = solve_once(kkt, W, ax, ay, az);
    for (int it = 0; it < settings.refinement_steps; ++it) {
      const RVec ex = ax - AeqT_mul(d.y) - G.transpose() * d.z;
      const RVec ey = p ? RVec(ay + Aeq * d.x) : RVec();
      const RVec wz = W ? W->apply(W->apply(d.z)) : d.z;
      const RVec ez = az + G * d.x - wz;
      const Dir c = solve_once(kkt, W, ex, ey, ez);
      d.x += c.x;
      if (p) d.y += c.y;
      d.z += c.z;
    }
    return d;
  };

  ConeSolution sol;

  // Starting point from the unscaled KKT system (least-squares primal point,
  // least-norm dual point), shifted into the cone interior.
  RVec x, y, z, s;
  {
    const KktSolver kkt0(assemble_h(nullptr), Aeq, settings.regularization, settings.refinement_steps);
    const Dir primal = solve_reduced(kkt0, nullptr, RVec::Zero(n), -beq, -h);
    x = primal.x;
    s = h - G * x;
    const Dir dual = solve_reduced(kkt0, nullptr, c, RVec::Zero(p), RVec::Zero(K.dim()));
    y = p ? RVec(-dual.y) : RVec();
    z = -dual.z;
    const double ts = -K.min_margin(s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) K.add_identity(s, 1.0 + ts);
    const double tz = -K.min_margin(z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) K.add_identity(z, 1.0 + tz);
  }
  double tau = 1.0;
  double kappa = 1.0;
  const RVec e = K.identity();
  const double degree = K.degree();
  bool stalled = false;  // no usable step from the current iterate

  for (int iter = 0;; ++iter) {
    // residuals of the embedding
    const RVec rx = AeqT_mul(y) + G.transpose() * z + c * tau;
    const RVec ry = p ? RVec(-Aeq * x + beq * tau) : RVec();
    const RVec rz = -(G * x) + h * tau - s;
    const double cx = c.dot(x);
    const double by_hz = dot_eq(beq, y) + h.dot(z);
    const double rt = -cx - by_hz - kappa;
    const double sz = s.dot(z);
    const double mu = (sz + tau * kappa) / (degree + 1.0);

    const double pres = std::sqrt((p ? ry.squaredNorm() : 0.0) + rz.squaredNorm()) / tau;
    const double dres = rx.norm() / tau;
    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap = sz / (tau * tau);

    if (settings.verbose) {
      std::cerr << std::scientific << std::setprecision(3) << "it " << iter << " pcost " << pcost
                << " dcost " << dcost << " gap " << gap << " pres " << pres << " dres " << dres
                << " tau " << tau << " kappa " << kappa << "\n";
    }

    auto fill = [&](SolveStatus status, const RVec& xs, const RVec& ss, const RVec& ys,
                    const RVec& zs) {
      sol.status = status;
      sol.iterations = iter;
      sol.x = xs;
      sol.s = RVec::Zero(prog.num_rows());
      sol.y = RVec::Zero(prog.num_rows());
      for (int i = 0; i < p; ++i) sol.y[sp.eq_rows[i]] = ys[i];
      for (std::size_t i = 0; i < sp.conic_rows.size(); ++i) {
        sol.s[sp.conic_rows[i]] = ss[i];
        sol.y[sp.conic_rows[i]] = zs[i];
      }
      SparseMat At = prog.A.transpose();
      sol.primal_residual = (prog.A * sol.x + sol.s - prog.b).norm();
      sol.dual_residual = (At * sol.y + c).norm();
      sol.gap = sol.s.dot(sol.y);
      sol.primal_objective = c.dot(sol.x);
      sol.dual_objective = -prog.b.dot(sol.y);
    };

    const bool gap_ok = gap <= settings.gap_tol * (1.0 + std::abs(pcost));
    if (pres <= settings.feasibility_tol * (1.0 + norm_b) &&
        dres <= settings.feasibility_tol * (1.0 + norm_c) && gap_ok) {
      fill(SolveStatus::Optimal, x / tau, s / tau, p ? RVec(y / tau) : RVec(), z / tau);
      // Acceptance is decided on the embedded iterate; report the exact
      // residuals of the returned point.
      return sol;
    }
    if (by_hz < 0.0) {
      const double pinf = (AeqT_mul(y) + G.transpose() * z).norm() / resx0 / (-by_hz);
      if (pinf <= settings.feasibility_tol) {
        const double scale = 1.0 / (-by_hz);
        fill(SolveStatus::Infeasible, RVec::Zero(n), RVec::Zero(K.dim()),
             p ? RVec(y * scale) : RVec(), z * scale);
        return sol;
      }
    }
    if (cx < 0.0) {
      const double ax_n = p ? (Aeq * x).norm() / resy0 : 0.0;
      const double dinf = std::max(ax_n, (G * x + s).norm() / resz0) / (-cx);
      if (dinf <= settings.feasibility_tol) {
        const double scale = 1.0 / (-cx);
        fill(SolveStatus::Unbounded, x * scale, s * scale, RVec::Zero(p), RVec::Zero(K.dim()));
        return sol;
      }
    }
    if (iter >= settings.max_iterations || stalled) {
      fill(SolveStatus::MaxIterations, x / tau, s / tau, p ? RVec(y / tau) : RVec(), z / tau);
      return sol;
    }

    const NtScaling W(K, s, z);
    const RVec lambda = W.apply(z);
    const KktSolver kkt(assemble_h(&W), Aeq, settings.regularization, settings.refinement_steps);

    // tau-coefficient direction, shared by predictor and corrector
    const Dir d1 = solve_reduced(kkt, &W, -c, p ? RVec(-beq) : RVec(), -h);
    const double d1_dot = -c.dot(d1.x) - dot_eq(beq, d1.y) - h.dot(d1.z);

    struct Step {
      Dir d;
      RVec ds;
      double dtau, dkappa;
    };
    auto direction = [&](double eta, const RVec& comp_s, double comp_k) {
      const RVec lds = K.jordan_div(lambda, comp_s);
      const RVec az = -eta * rz + W.apply(lds);
      const Dir d2 = solve_reduced(kkt, &W, -eta * rx, p ? RVec(-eta * ry) : RVec(), az);
      const double num =
          -eta * rt + c.dot(d2.x) + dot_eq(beq, d2.y) + h.dot(d2.z) + comp_k / tau;
      const double dtau = num / (kappa / tau + d1_dot);
      Step st;
      st.d.x = d2.x + dtau * d1.x;
      st.d.y = p ? RVec(d2.y + dtau * d1.y) : RVec();
      st.d.z = d2.z + dtau * d1.z;
      st.dtau = dtau;
      st.dkappa = (comp_k - kappa * dtau) / tau;
      st.ds = W.apply(lds - W.apply(st.d.z));
      return st;
    };
    auto step_length = [&](const Step& st) {
      double a = std::min(K.max_step(s, st.ds), K.max_step(z, st.d.z));
      if (st.dtau < 0.0) a = std::min(a, -tau / st.dtau);
      if (st.dkappa < 0.0) a = std::min(a, -kappa / st.dkappa);
      return a;
    };

    // predictor
    const Step aff = direction(1.0, -K.jordan(lambda, lambda), -tau * kappa);
    const double alpha_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // corrector
    const RVec ds_aff = W.apply_inverse(aff.ds);
    const RVec dz_aff = W.apply(aff.d.z);
    const RVec comp_s = -K.jordan(lambda, lambda) - K.jordan(ds_aff, dz_aff) + sigma * mu * e;
    const double comp_k = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Step st = direction(1.0 - sigma, comp_s, comp_k);
    const double alpha = std::min(1.0, settings.step_fraction * step_length(st));

    const bool finite = std::isfinite(alpha) && st.d.x.allFinite() && st.d.z.allFinite() &&
                        st.ds.allFinite() && std::isfinite(st.dtau) && std::isfinite(st.dkappa);
    if (!finite || alpha <= 0.0) {
      stalled = true;
      continue;
    }
    x += alpha * st.d.x;
    if (p) y += alpha * st.d.y;
    z += alpha * st.d.z;
    s += alpha * st.ds;
    tau += alpha * st.dtau;
    kappa += alpha * st.dkappa;
  }
}

ConeSolution solve(const ConeProgram& program, const SolverSettings& settings) {
  return InteriorPointSolver().solve(program, settings);
}

void write_program(const ConeProgram& prog, std::ostream& out) {
  out << "vars " << prog.num_vars() << "\nrows " << prog.num_rows() << "\ncones "
      << prog.cones.size() << "\n";
  for (const ConeBlock& k : prog.cones) {
    const char* name = k.kind == ConeKind::Zero          ? "zero"
                       : k.kind == ConeKind::NonNegative ? "nonneg"
                                                         : "soc";
    out << name << " " << k.dim << "\n";
  }
  out << std::setprecision(17);
  out << "c";
  for (int i = 0; i < prog.num_vars(); ++i) out << " " << prog.c[i];
  out << "\nb";
  for (int i = 0; i < prog.num_rows(); ++i) out << " " << prog.b[i];
  out << "\nA\n";
  const RMat dense = RMat(prog.A);
  for (int r = 0; r < dense.rows(); ++r) {
    for (int j = 0; j < dense.cols(); ++j) out << (j ? " " : "") << dense(r, j);
    out << "\n";
  }
}

void dump_program(const ConeProgram& program, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("dump_program: cannot open " + path);
  write_program(program, f);
}

double AffineRow::evaluate(const RVec& x) const {
  double v = constant;
  for (const auto& [i, a] : terms) v += a * x[i];
  return v;
}

ProgramBuilder::ProgramBuilder(int num_vars) : num_vars_(num_vars), c_(RVec::Zero(num_vars)) {}

void ProgramBuilder::add_cone(ConeKind kind, const std::vector<AffineRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("ProgramBuilder: empty cone");
  for (const AffineRow& row : rows) {
    const int r = static_cast<int>(rhs_.size());
    for (const auto& [i, a] : row.terms) {
      if (i < 0 || i >= num_vars_) throw std::out_of_range("ProgramBuilder: variable index");
      if (a != 0.0) triplets_.emplace_back(r, i, -a);
    }
    rhs_.push_back(row.constant);
  }
  cones_.push_back({kind, static_cast<int>(rows.size())});
}

void ProgramBuilder::set_objective(const RVec& c) {
  if (c.size() != num_vars_) throw std::invalid_argument("ProgramBuilder: objective length");
  c_ = c;
}

ConeProgram ProgramBuilder::build() const {
  ConeProgram prog;
  prog.c = c_;
  prog.b = Eigen::Map<const RVec>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  prog.A.resize(static_cast<Eigen::Index>(rhs_.size()), num_vars_);
  prog.A.setFromTriplets(triplets_.begin(), triplets_.end());
  prog.cones = cones_;
  return prog;
}

std::array<AffineRow, 2> complex_affine_to_real(const ComplexAffine& form, int var_offset) {
  std::array<AffineRow, 2> rows;
  rows[0].constant = form.constant.real();
  rows[1].constant = form.constant.imag();
  for (Eigen::Index i = 0; i < form.coeffs.size(); ++i) {
    const cd a = form.coeffs[i];
    if (a == 0.0) continue;
    const int re = var_offset + 2 * static_cast<int>(i);
    const int im = re + 1;
    // (ar + j ai)(zr + j zi) = (ar zr - ai zi) + j (ai zr + ar zi)
    rows[0].terms.emplace_back(re, a.real());
    rows[0].terms.emplace_back(im, -a.imag());
    rows[1].terms.emplace_back(re, a.imag());
    rows[1].terms.emplace_back(im, a.real());
  }
  return rows;
}

RVec lift_complex(const CVec& z) {
  RVec x(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    x[2 * i] = z[i].real();
    x[2 * i + 1] = z[i].imag();
  }
  return x;
}

CVec unlift_complex(const RVec& x, int offset, int count) {
  CVec z(count);
  for (int i = 0; i < count; ++i) z[i] = {x[offset + 2 * i], x[offset + 2 * i + 1]};
  return z;
}

std::vector<AffineRow> quadratic_epigraph_cone(const ComplexAffine& form, int t_index,
                                               int var_offset) {
  auto parts = complex_affine_to_real(form, var_offset);
  for (auto& row : parts) {
    for (auto& term : row.terms) term.second *= 2.0;
    row.constant *= 2.0;
  }
  AffineRow head{{{t_index, 1.0}}, 1.0};
  AffineRow tail{{{t_index, 1.0}}, -1.0};
  return {head, parts[0], parts[1], tail};
}

}  // namespace cfisac::cone
