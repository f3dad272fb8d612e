// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sparse recovery: reconstruct z from y = Phi z by l1 minimization, plus
// two independent reference solvers (greedy matching pursuit, exhaustive
// smallest-support search) used to cross-check it.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mpcc/sensing.hpp"

namespace mpcc {

struct SolverOptions {
  // Residual budget: 0 solves the equality-constrained program, positive
  // values relax the constraint to an l2 ball of this radius.
  double epsilon = 0.0;
  int max_iters = 4000;
  double rho = 1.0;      // splitting penalty
  double abs_tol = 1e-7;
  double rel_tol = 1e-5;
  // Least-squares refit on the detected support {i : |z_i| > 1e-4 max|z|}.
  // The refit is kept only if it meets the residual budget.
  bool debias = true;
};

// Output of the cloud-side decompression. The vector always satisfies the
// residual budget of the options it was solved with; converged reports
// whether the iteration reached its tolerances before max_iters. The caller
// decides whether a non-converged (but still feasible) solution is usable.
struct DecompressedBlock {
  Eigen::VectorXd z;
  std::uint64_t index = 0;
  int iterations = 0;
  double residual = 0.0;
  double l1_norm = 0.0;
  bool converged = true;
};

// Equality/ball-constrained l1 solver (alternating-direction splitting).
// Construction factors the measurement operator once; solve() is const and
// reentrant, so one solver instance serves many blocks in parallel.
//
// m == n is the degenerate full-rate case: a single direct linear solve,
// reported as converged with zero iterations.
class BpSolver {
 public:
  explicit BpSolver(const SensingMatrix& phi);

  DecompressedBlock solve(const Eigen::VectorXd& y, const SolverOptions& opts = {}) const;

  const SensingMatrix& phi() const { return phi_; }

 private:
  Eigen::VectorXd project_affine(const Eigen::VectorXd& v, const Eigen::VectorXd& y) const;
  Eigen::VectorXd project_ball(const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                               double eps) const;

  SensingMatrix phi_;
  bool square_ = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;   // m == n only
  Eigen::LLT<Eigen::MatrixXd> gram_llt_;      // Phi Phi^T, m < n
  Eigen::MatrixXd gram_eigvecs_;              // eigendecomposition of Phi Phi^T
  Eigen::VectorXd gram_eigvals_;              // (ball projection path)
};

// One-shot convenience wrapper around BpSolver.
DecompressedBlock solve_bp(const SensingMatrix& phi, const Eigen::VectorXd& y,
                           const SolverOptions& opts = {});

// Greedy orthogonal matching pursuit: k rounds of max-correlation column
// selection with a least-squares refit each round.
DecompressedBlock solve_omp(const SensingMatrix& phi, const Eigen::VectorXd& y, int k);

struct L0Result {
  Eigen::VectorXd z;
  double residual = 0.0;
  bool feasible = false;           // residual within tolerance at some support
  std::vector<int> support;
};

// Exhaustive smallest-support search, gated to tiny instances (n <= 16,
// k_max <= 3). Scans support sizes in increasing order, least-squares on
// every candidate support; returns the feasible solution of smallest
// support, breaking ties by smaller solution norm and then by
// lexicographically earlier support. Infeasible y yields the best-residual
// candidate with feasible = false.
L0Result l0_oracle(const SensingMatrix& phi, const Eigen::VectorXd& y, int k_max);

// Support under the debiasing rule: indices with |z_i| > 1e-4 * max|z|.
std::vector<int> detect_support(const Eigen::VectorXd& z);

}  // namespace mpcc
