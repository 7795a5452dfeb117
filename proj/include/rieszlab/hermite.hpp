#pragma once

#include <span>
#include <vector>

#include "rieszlab/common.hpp"
#include "rieszlab/pnorm.hpp"
#include "rieszlab/spectral.hpp"

namespace rieszlab {

/// Truncated Hermite-polynomial tensor basis: multi-indices k in {0..N}^d.
/// The Ornstein-Uhlenbeck eigenvalue of axis r at index k is 2 k_r.
struct HermiteTruncation {
  int d = 1;
  int N = 1;
  std::size_t max_points = std::size_t{1} << 24;

  HermiteTruncation(int d_, int N_, std::size_t cap = std::size_t{1} << 24);
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

/// Coefficient tensor indexed by k in {0..N}^d, row-major.
class CoeffTensor {
 public:
  CoeffTensor(HermiteTruncation trunc, CVec coeffs);

  static CoeffTensor zeros(const HermiteTruncation& t);
  static CoeffTensor basis(const HermiteTruncation& t, std::span<const int> k);
  static CoeffTensor random_normal(const HermiteTruncation& t, Rng& rng);

  const HermiteTruncation& trunc() const { return trunc_; }
  const CVec& values() const { return c_; }
  CVec& values() { return c_; }
  std::size_t size() const { return c_.size(); }

  static std::size_t flat_index(const HermiteTruncation& t, std::span<const int> k);

 private:
  HermiteTruncation trunc_;
  CVec c_;
};

/// n-point Gauss-Hermite rule for the weight exp(-x^2), nodes ascending and
/// exactly symmetric. Built by Golub-Welsch on the Jacobi matrix.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule gauss_hermite(int n);
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Values of the orthonormal Hermite polynomials H~_0..H~_N at x
/// (three-term recurrence, H~_0 = pi^(-1/4)).
std::vector<double> hermite_values(int N, double x);

/// Coefficient at k scaled by m(2 k_1, ..., 2 k_d); zero_policy at k = 0.
CoeffTensor apply_ou_multiplier(const JointMultiplier& m, const CoeffTensor& c);

/// delta_r: output[m] = sqrt(2 (m_r + 1)) c[m + e_r] (0 past the truncation).
CoeffTensor apply_delta(int axis, const CoeffTensor& c);

/// delta_r^*: output[m] = sqrt(2 m_r) c[m - e_r] (0 at m_r = 0).
CoeffTensor apply_delta_star(int axis, const CoeffTensor& c);

/// Direct Riesz transform delta_r (sum L)^(-1/2) Pi_0:
/// output[m] = sqrt(2 (m_r + 1)) / sqrt(2 (|m| + 1)) c[m + e_r].
CoeffTensor apply_riesz_hermite(int axis, const CoeffTensor& c);

/// Factored route (delta_r L_r^(-1/2) Pi_{0,r}) o (m_{1/2} factor with Pi_{0,r}).
CoeffTensor apply_riesz_hermite_factored(int axis, const CoeffTensor& c);

/// Adjoint of apply_riesz_hermite on the truncation.
CoeffTensor apply_riesz_hermite_adjoint(int axis, const CoeffTensor& c);

/// Multiplier (2 k_r + eps)^sigma (2|k| + d eps)^(-sigma) with Pi_{0,r}
/// (zero whenever k_r = 0).
CoeffTensor hermite_joint_factor(int axis, double sigma, double eps,
                                 const CoeffTensor& c);

/// Exact coefficient-space l2 operator norm of the truncated Riesz transform
/// (the largest weight of the shift, scanned over the index set).
double riesz_hermite_opnorm2(const HermiteTruncation& t, int axis);

/// Values of the synthesized function on the tensor quadrature grid (n^d).
CVec synthesize(const CoeffTensor& c, const QuadratureRule& rule);

/// Quadrature projection of node values back onto the truncation.
CoeffTensor analyze(std::span<const cplx> node_values, const HermiteTruncation& t,
                    const QuadratureRule& rule);

/// ||f||_{L^p(gamma)} by Gauss-Hermite quadrature, gamma = exp(-x^2) dx per
/// axis; p = inf gives the max over nodes. Requires rule size >= N + 1
/// (n >= 4N recommended for p != 2).
double quad_lp_norm(const CoeffTensor& c, double p, const QuadratureRule& rule);

/// The truncated Riesz transform as an operator on quadrature node values,
/// conjugated by the tensor weights w^(1/p) so that the counting l^p norm of
/// the returned operator equals the quadrature L^p(gamma) -> L^p(gamma) norm.
LinearOperator hermite_node_riesz_operator(const HermiteTruncation& t,
                                           const QuadratureRule& rule, int axis,
                                           double p);

}  // namespace rieszlab
