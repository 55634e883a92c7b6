// SPDX-License-Identifier: Apache-2.0
//
// Conic programs in slack standard form
//
//     minimize    c^T x
//     subject to  A x + s = b,   s in K = K_1 x ... x K_r
//
// with each K_i a zero cone, a nonnegative orthant or a second-order cone
// {(s0, s1) : s0 >= ||s1||}. The dual is  maximize -b^T y  s.t.  A^T y + c = 0,
// y in K*. The solver is a primal-dual interior-point method on the
// homogeneous self-dual embedding, with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector step, so infeasible and unbounded programs
// end with a certificate instead of stalling.
//
// The reduced KKT system assumes the conic rows together with the zero-cone
// rows have full column rank, and the zero-cone rows full row rank.
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "cfisac/linalg.hpp"

namespace cfisac::cone {

enum class ConeKind { Zero, NonNegative, SecondOrder };

struct ConeBlock {
  ConeKind kind;
  int dim;
};

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ConeProgram {
  RVec c;
  SparseMat A;
  RVec b;
  std::vector<ConeBlock> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  // Throws std::invalid_argument on inconsistent dimensions or non-finite data.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(SolveStatus status);

struct ConeSolution {
  SolveStatus status = SolveStatus::MaxIterations;
  RVec x;  // primal point (or unboundedness ray)
  RVec s;  // slack, zero on zero-cone rows
  RVec y;  // dual point (or infeasibility certificate with b^T y = -1)
  double primal_residual = 0.0;  // ||A x + s - b||
  double dual_residual = 0.0;    // ||A^T y + c||
  double gap = 0.0;              // s^T y
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
};

struct SolverSettings {
  int max_iterations = 200;
  double feasibility_tol = 1e-7;  // relative to 1 + ||b|| and 1 + ||c||
  double gap_tol = 1e-8;          // relative to 1 + |c^T x|
  double step_fraction = 0.99;
  double regularization = 1e-13;  // static KKT regularization, relative
  int refinement_steps = 3;
  bool verbose = false;
};

class ConeSolver {
 public:
  virtual ~ConeSolver() = default;
  virtual ConeSolution solve(const ConeProgram& program, const SolverSettings& settings) const = 0;
};

// Dense-KKT interior-point solver. Deterministic: identical programs yield
// identical iterates bit for bit.
class InteriorPointSolver final : public ConeSolver {
 public:
  ConeSolution solve(const ConeProgram& program, const SolverSettings& settings) const override;
};

ConeSolution solve(const ConeProgram& program, const SolverSettings& settings = {});

// Plain-text dump: dimensions, cone list, then c, b and dense A row by row.
void write_program(const ConeProgram& program, std::ostream& out);
void dump_program(const ConeProgram& program, const std::string& path);

// Affine expression over the real variables, used for one slack row.
struct AffineRow {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  double evaluate(const RVec& x) const;
};

// Collects cone blocks row by row. Each row describes its slack entry
// s_i = terms . x + constant, i.e. A_i = -terms and b_i = constant.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(int num_vars);

  void add_cone(ConeKind kind, const std::vector<AffineRow>& rows);
  void set_objective(const RVec& c);
  ConeProgram build() const;

 private:
  int num_vars_;
  RVec c_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> rhs_;
  std::vector<ConeBlock> cones_;
};

// Complex affine form  sum_i coeffs_i * z_i + constant  over complex variables
// whose real lift is interleaved: Re z_i at var_offset + 2i, Im z_i right after.
// Conjugate-linear forms a^H z are passed as coeffs = conj(a).
struct ComplexAffine {
  CVec coeffs;
  cd constant = 0.0;
};

// Real and imaginary parts of the form as two real affine rows.
std::array<AffineRow, 2> complex_affine_to_real(const ComplexAffine& form, int var_offset = 0);

RVec lift_complex(const CVec& z);
CVec unlift_complex(const RVec& x, int offset, int count);

// |form|^2 <= t as the 4-dim cone ||(2 Re, 2 Im, t - 1)|| <= t + 1; `t_index`
// is the real variable holding t.
std::vector<AffineRow> quadratic_epigraph_cone(const ComplexAffine& form, int t_index,
                                               int var_offset = 0);

}  // namespace cfisac::cone
