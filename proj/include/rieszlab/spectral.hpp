#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "rieszlab/common.hpp"

namespace rieszlab {

/// Per-axis eigenvalue lists of a product system L = (L_1,...,L_d); the joint
/// spectrum is the Cartesian product of the axes.
class ProductSpectrum {
 public:
  explicit ProductSpectrum(std::vector<std::vector<double>> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const;  // number of joint eigenvalue tuples
  const std::vector<double>& axis(int a) const { return axes_[a]; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }

 private:
  std::vector<std::vector<double>> axes_;
};

/// Scalar function on the joint spectrum. The zero_policy value is returned at
/// the joint tuple with lambda_1 + ... + lambda_d = 0, where the multiplier
/// formulas of interest are singular (default 0, i.e. the projection away from
/// the zero eigenspace). A multiplier that is regular there can opt back in by
/// setting zero_policy to its limit value, e.g. 1 for the identity.
class JointMultiplier {
 public:
  using Eval = std::function<cplx(std::span<const double>)>;

  explicit JointMultiplier(Eval eval, cplx zero_policy = 0.0)
      : eval_(std::move(eval)), zero_policy_(zero_policy) {}

  cplx operator()(std::span<const double> lambda) const;
  cplx zero_policy() const { return zero_policy_; }

 private:
  Eval eval_;
  cplx zero_policy_;
};

/// Sampling grid for a polysector {(z1,z2): |Arg z_r| < phi_r} in the product
/// of right half-planes: per coordinate, log-spaced radii on [r_min, r_max]
/// and a linear angular grid on [-phi_r, phi_r].
struct SectorSpec {
  std::array<double, 2> phi{0.7853981633974483, 0.7853981633974483};  // pi/4
  double r_min = 1e-6;
  double r_max = 1e6;
  int angular = 64;  // angular samples per coordinate
  int radial = 32;   // radial samples per coordinate

  void validate() const;  // throws std::invalid_argument
};

struct SectorSup {
  double value = 0.0;
  std::array<cplx, 2> argmax{};  // (z1, z2) attaining the sampled maximum
};

/// m_sigma(z1, z2) = z1^sigma * (z1 + z2)^(-sigma), principal branches.
/// z1 == 0 returns 0 (the sigma > 0 limit). Throws std::domain_error when
/// sigma <= 0, when z1 + z2 == 0 with z1 != 0, or off the right half-planes.
cplx eval_m_sigma(cplx z1, cplx z2, double sigma);

/// Diagonal action of a multiplier on coefficients indexed by the joint
/// spectrum (row-major over the axes). Throws on shape mismatch.
CVec apply_diagonal(const JointMultiplier& mult, const ProductSpectrum& spectrum,
                    std::span<const cplx> coeffs);

/// Sampled sup of |m_sigma| over the polysector grid, with the argmax tuple.
/// Ties broken by first occurrence in row-major grid order.
SectorSup sector_sup(double sigma, const SectorSpec& spec);

/// p* = arcsin|2/p - 1| (radians), the sector angle threshold reported for p.
double p_star(double p);

}  // namespace rieszlab
