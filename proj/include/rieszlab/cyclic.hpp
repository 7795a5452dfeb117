#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rieszlab/common.hpp"

namespace rieszlab {

/// (Z_K)^d with a construction-time cap on the total point count.
struct CyclicProductGroup {
  int K = 2;
  int d = 1;
  std::size_t max_points = std::size_t{1} << 24;

  CyclicProductGroup(int K_, int d_, std::size_t cap = std::size_t{1} << 24);
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

/// Finitely supported symmetric probability measure on Z_K whose support
/// generates the group.
class SymmetricMeasure {
 public:
  SymmetricMeasure(int K, std::vector<double> weights);

  /// mu_{g0} = (delta_{g0} + delta_{-g0}) / 2.
  static SymmetricMeasure nearest_neighbor(int K, int g0 = 1);
  /// (delta_0 + delta_{g0} + delta_{-g0}) / 3.
  static SymmetricMeasure lazy(int K, int g0 = 1);

  int K() const { return K_; }
  const std::vector<double>& weights() const { return w_; }
  bool is_nearest_neighbor(int g0) const;
  /// support pairs (y, weight) with weight > 0
  const std::vector<std::pair<int, double>>& support() const { return support_; }

 private:
  int K_;
  std::vector<double> w_;
  std::vector<std::pair<int, double>> support_;
};

/// Spectrum of the one-axis walk operator P_mu under the DFT: symbol[xi] is
/// real by symmetry of mu, and lambda[xi] = 1 - symbol[xi] in [0, 2] with
/// lambda[0] = 0 exactly (computed from 2 sin^2, never from a complex DFT).
struct WalkSpectrum {
  std::vector<double> symbol;
  std::vector<double> lambda;

  static WalkSpectrum from_measure(const SymmetricMeasure& mu);
};

/// Complex-valued function on (Z_K)^d, row-major over (x_1, ..., x_d).
class GridFunction {
 public:
  GridFunction(CyclicProductGroup group, CVec values);

  static GridFunction zeros(const CyclicProductGroup& g);
  static GridFunction constant(const CyclicProductGroup& g, cplx c);
  static GridFunction basis(const CyclicProductGroup& g, std::size_t flat);
  static GridFunction random_normal(const CyclicProductGroup& g, Rng& rng);

  const CyclicProductGroup& group() const { return group_; }
  const CVec& values() const { return v_; }
  CVec& values() { return v_; }
  std::size_t size() const { return v_.size(); }

 private:
  CyclicProductGroup group_;
  CVec v_;
};

/// In-place d-dimensional DFT on a K^d row-major grid (FFTW behind the
/// scenes; plan creation serialized, execution thread-safe).
class DftEngine {
 public:
  DftEngine(int K, int d);
  ~DftEngine();
  DftEngine(const DftEngine&) = delete;
  DftEngine& operator=(const DftEngine&) = delete;

  void forward(CVec& data) const;   // unnormalized
  void backward(CVec& data) const;  // divides by K^d

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct MultiplierSup {
  double value = 0.0;
  std::vector<int> argmax;  // frequency tuple attaining the sup
};

struct DoubleDiffReport {
  double max_deviation = 0.0;
  bool mu_is_nearest_neighbor = false;  // identity is exact only for mu_{g0}
  CVec worst_input;                     // input attaining max_deviation
};

/// The product system on (Z_K)^d: walk operator P along each axis, discrete
/// Laplacian L = I - P, heat semigroup, difference operators, projections,
/// Riesz transforms and the spectral factorization pieces. All operations are
/// pure; the spectral path diagonalizes through the d-dimensional DFT.
class CyclicSystem {
 public:
  CyclicSystem(CyclicProductGroup group, SymmetricMeasure mu);

  const CyclicProductGroup& group() const { return group_; }
  const SymmetricMeasure& mu() const { return mu_; }
  const WalkSpectrum& spectrum() const { return spec_; }
  const DftEngine& dft() const { return *dft_; }

  // --- walk operator P (tensor factor on one axis) ---
  GridFunction apply_walk(const GridFunction& f, int axis) const;      // direct sum
  GridFunction apply_walk_fft(const GridFunction& f, int axis) const;  // DFT path

  // --- heat semigroup exp(-t sum_{a in axes} L_a) ---
  GridFunction heat(double t, const GridFunction& f) const;  // all axes
  GridFunction heat(double t, const GridFunction& f, std::span<const int> axes) const;
  /// truncated-series path exp(-t) sum_{n<=terms} t^n P^n / n!, axis by axis
  GridFunction heat_series(double t, const GridFunction& f, int terms = 60) const;

  // --- difference operator along one axis and its adjoint ---
  GridFunction partial_difference(int g0, const GridFunction& f, int axis) const;
  GridFunction partial_difference_fft(int g0, const GridFunction& f, int axis) const;
  GridFunction partial_difference_adjoint(int g0, const GridFunction& f, int axis) const;

  // --- mean-removing projections ---
  GridFunction project_mean_zero(const GridFunction& f) const;                 // Pi_0
  GridFunction project_axis_mean_zero(const GridFunction& f, int axis) const;  // Pi_{0,r}

  // --- Riesz transforms and factorization pieces ---
  GridFunction riesz_transform(int g0, int axis, const GridFunction& f) const;
  GridFunction riesz_one_dim(int g0, int axis, const GridFunction& f) const;
  /// multiplier (lambda_r + eps)^sigma (sum_s lambda_s + d eps)^(-sigma),
  /// composed with Pi_{0,r} (zero whenever xi_r = 0)
  GridFunction joint_factor(int axis, double sigma, double eps,
                            const GridFunction& f) const;
  /// pointwise (sum_r |R_r f|^2)^(1/2)
  GridFunction square_function(int g0, const GridFunction& f) const;

  // --- exact spectral quantities ---
  MultiplierSup riesz_multiplier_sup(int g0, int axis) const;
  MultiplierSup one_dim_multiplier_sup(int g0, int axis) const;
  std::size_t kernel_tuple_count(double tol = 1e-14) const;
  DoubleDiffReport double_difference_check(int g0, std::uint64_t seed = kDefaultSeed) const;

  // --- generic spectral application ---
  using Symbol = std::function<cplx(std::span<const int>)>;
  CVec build_symbol(const Symbol& symbol) const;
  GridFunction apply_precomputed(const GridFunction& f, std::span<const cplx> symbol) const;
  GridFunction apply_symbol(const GridFunction& f, const Symbol& symbol) const;
  /// unnormalized character x -> exp(2 pi i <x, xi> / K)
  GridFunction fourier_mode(std::span<const int> xi) const;

  CVec riesz_symbol(int g0, int axis) const;
  CVec one_dim_symbol(int g0, int axis) const;
  CVec joint_factor_symbol(int axis, double sigma, double eps) const;

 private:
  void check_axis(int axis) const;
  void check_shape(const GridFunction& f) const;

  CyclicProductGroup group_;
  SymmetricMeasure mu_;
  WalkSpectrum spec_;
  std::shared_ptr<DftEngine> dft_;
  std::vector<std::size_t> stride_;
};

}  // namespace rieszlab
