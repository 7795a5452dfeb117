#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rieszlab/common.hpp"

namespace rieszlab {

/// A linear map on C^dim given as a black box. The adjoint is required by the
/// p = 2 and p = inf exact routes and by the Boyd iteration.
struct LinearOperator {
  std::size_t dim = 0;
  std::function<CVec(std::span<const cplx>)> apply;
  std::function<CVec(std::span<const cplx>)> adjoint;
};

/// Bracketed operator-norm result. `lower` is certified by `witness`:
/// lp_norm(A*witness, p) / lp_norm(witness, p) reproduces it.
struct NormEstimate {
  double p = 2.0;
  double lower = 0.0;
  std::optional<double> upper;
  std::string method;  // exact-1 | exact-2 | exact-inf | boyd | brute | interp
  CVec witness;
  int iterations = 0;
  bool converged = false;
};

/// Counting-measure l^p norm, p in [1, inf]; stable (scaled + pairwise) sums.
double lp_norm(std::span<const cplx> f, double p);

/// Ratio lp_norm(A x, p) / lp_norm(x, p); 0 for x == 0.
double witness_ratio(const LinearOperator& A, std::span<const cplx> x, double p);

/// Checks <Ax, y> == <x, A*y> on seeded random vectors (relative 1e-10).
bool adjoint_consistent(const LinearOperator& A, std::uint64_t seed = kDefaultSeed);

/// Exact norms: p = 1 by column probing, p = inf by row probing through the
/// adjoint, p = 2 by power iteration on A*A (relative tolerance `tol`,
/// upper = lower * (1 + tol)). Other p values are rejected.
NormEstimate opnorm_exact(const LinearOperator& A, double p, double tol = 1e-10,
                          int maxiter = 10000, std::uint64_t seed = kDefaultSeed);

/// Observer for the Boyd ratio sequence (restart, iteration, ratio).
using BoydObserver = std::function<void(int, int, double)>;

/// Nonlinear power iteration for the l^p -> l^p norm, p in (1, inf):
///   y = Ax, s = phi_p(y), z = A*s, x <- normalize(phi_p'(z)),
/// phi_q(v)_i = |v_i|^(q-1) * phase(v_i). Restart 0 starts all-positive, the
/// rest from seeded complex Gaussian starts (stream seed + restart index).
/// The result is the best stationary ratio; a lower bound, never an upper.
NormEstimate boyd_estimate(const LinearOperator& A, double p, int restarts = 16,
                           std::uint64_t seed = kDefaultSeed, double tol = 1e-9,
                           int maxiter = 1000, const BoydObserver& observer = {});

/// Dense-grid maximization of ||Ax||_p / ||x||_p over the real unit sphere for
/// explicit real matrices of size n <= 3 (row-major). The initial full sweep
/// uses `grid` points per angular dimension; the argmax is then refined by
/// local grid zooming until the value changes by less than `refine_tol`.
NormEstimate brute_small(std::span<const double> matrix, int n, double p,
                         int grid = 1024, double refine_tol = 1e-6);

/// Riesz-Thorin upper bound: b0^(1-theta) * b1^theta with
/// 1/p = (1-theta)/p0 + theta/p1. p must lie between p0 and p1.
double interp_upper(double p, double p0, double bound0, double p1, double bound1);

}  // namespace rieszlab
