#include "rieszlab/cyclic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rieszlab {

namespace {

constexpr double kPi = std::numbers::pi;

cplx pairwise_csum(std::span<const cplx> v) {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

}  // namespace

CyclicProductGroup::CyclicProductGroup(int K_, int d_, std::size_t cap)
    : K(K_), d(d_), max_points(cap) {
  if (K < 2) throw std::invalid_argument("CyclicProductGroup: K must be >= 2");
  if (d < 1) throw std::invalid_argument("CyclicProductGroup: d must be >= 1");
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) {
    if (n > max_points / static_cast<std::size_t>(K))
      throw std::invalid_argument("CyclicProductGroup: K^d exceeds the memory cap");
    n *= static_cast<std::size_t>(K);
  }
  size_ = n;
}

SymmetricMeasure::SymmetricMeasure(int K, std::vector<double> weights)
    : K_(K), w_(std::move(weights)) {
  if (K_ < 2) throw std::invalid_argument("SymmetricMeasure: K must be >= 2");
  if (static_cast<int>(w_.size()) != K_)
    throw std::invalid_argument("SymmetricMeasure: need one weight per group element");
  double sum = 0.0;
  for (double w : w_) {
    if (!(w >= 0.0)) throw std::invalid_argument("SymmetricMeasure: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-15)
    throw std::invalid_argument("SymmetricMeasure: weights must sum to 1");
  for (int y = 0; y < K_; ++y) {
    if (w_[y] != w_[(K_ - y) % K_])
      throw std::invalid_argument("SymmetricMeasure: weights must be symmetric");
  }
  int g = K_;
  for (int y = 0; y < K_; ++y) {
    if (w_[y] > 0.0) {
      support_.emplace_back(y, w_[y]);
      if (y > 0) g = std::gcd(g, y);
    }
  }
  if (g != 1)
    throw std::invalid_argument("SymmetricMeasure: support does not generate Z_K");
}

SymmetricMeasure SymmetricMeasure::nearest_neighbor(int K, int g0) {
  if (K < 2) throw std::invalid_argument("nearest_neighbor: K must be >= 2");
  const int y = ((g0 % K) + K) % K;
  std::vector<double> w(K, 0.0);
  w[y] += 0.5;
  w[(K - y) % K] += 0.5;
  return SymmetricMeasure(K, std::move(w));
}

SymmetricMeasure SymmetricMeasure::lazy(int K, int g0) {
  if (K < 2) throw std::invalid_argument("lazy: K must be >= 2");
  const int y = ((g0 % K) + K) % K;
  std::vector<double> w(K, 0.0);
  w[0] += 1.0 / 3.0;
  w[y] += 1.0 / 3.0;
  w[(K - y) % K] += 1.0 / 3.0;
  return SymmetricMeasure(K, std::move(w));
}

bool SymmetricMeasure::is_nearest_neighbor(int g0) const {
  const int y = ((g0 % K_) + K_) % K_;
  std::vector<double> ref(K_, 0.0);
  ref[y] += 0.5;
  ref[(K_ - y) % K_] += 0.5;
  return w_ == ref;
}

WalkSpectrum WalkSpectrum::from_measure(const SymmetricMeasure& mu) {
  const int K = mu.K();
  WalkSpectrum s;
  s.symbol.resize(K);
  s.lambda.resize(K);
  for (int xi = 0; xi < K; ++xi) {
    double lam = 0.0;
    for (const auto& [y, w] : mu.support()) {
      const double sn = std::sin(kPi * xi * y / K);
      lam += w * 2.0 * sn * sn;
    }
    s.lambda[xi] = lam;
    s.symbol[xi] = 1.0 - lam;
  }
  return s;
}

GridFunction::GridFunction(CyclicProductGroup group, CVec values)
    : group_(group), v_(std::move(values)) {
  if (v_.size() != group_.size())
    throw std::invalid_argument("GridFunction: value count != K^d");
}

GridFunction GridFunction::zeros(const CyclicProductGroup& g) {
  return GridFunction(g, CVec(g.size(), cplx(0.0, 0.0)));
}

GridFunction GridFunction::constant(const CyclicProductGroup& g, cplx c) {
  return GridFunction(g, CVec(g.size(), c));
}

GridFunction GridFunction::basis(const CyclicProductGroup& g, std::size_t flat) {
  if (flat >= g.size()) throw std::invalid_argument("GridFunction::basis: index");
  CVec v(g.size(), cplx(0.0, 0.0));
  v[flat] = 1.0;
  return GridFunction(g, std::move(v));
}

GridFunction GridFunction::random_normal(const CyclicProductGroup& g, Rng& rng) {
  return GridFunction(g, rng.complex_normal_vec(g.size()));
}

// ---------------------------------------------------------------------------
// DftEngine

struct DftEngine::Impl {
  std::size_t n = 0;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
};

DftEngine::DftEngine(int K, int d) : impl_(std::make_unique<Impl>()) {
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(K);
  impl_->n = n;
  std::vector<int> dims(d, K);
  // dummy buffer for planning; FFTW_UNALIGNED lets the plan run on any array
  CVec scratch(n);
  auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard<std::mutex> lock(Impl::planner_mutex());
  impl_->fwd = fftw_plan_dft(d, dims.data(), ptr, ptr, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->bwd = fftw_plan_dft(d, dims.data(), ptr, ptr, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("DftEngine: planning failed");
}

DftEngine::~DftEngine() {
  std::lock_guard<std::mutex> lock(Impl::planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
}

void DftEngine::forward(CVec& data) const {
  if (data.size() != impl_->n) throw std::invalid_argument("DftEngine: size mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->fwd, ptr, ptr);
}

void DftEngine::backward(CVec& data) const {
  if (data.size() != impl_->n) throw std::invalid_argument("DftEngine: size mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->bwd, ptr, ptr);
  const double inv = 1.0 / static_cast<double>(impl_->n);
  for (auto& z : data) z *= inv;
}

// ---------------------------------------------------------------------------
// CyclicSystem

CyclicSystem::CyclicSystem(CyclicProductGroup group, SymmetricMeasure mu)
    : group_(group),
      mu_(std::move(mu)),
      spec_(WalkSpectrum::from_measure(mu_)),
      dft_(std::make_shared<DftEngine>(group.K, group.d)) {
  if (mu_.K() != group_.K)
    throw std::invalid_argument("CyclicSystem: measure lives on a different Z_K");
  stride_.resize(group_.d);
  std::size_t s = 1;
  for (int a = group_.d - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(group_.K);
  }
}

void CyclicSystem::check_axis(int axis) const {
  if (axis < 0 || axis >= group_.d)
    throw std::invalid_argument("CyclicSystem: axis out of range");
}

void CyclicSystem::check_shape(const GridFunction& f) const {
  if (f.group().K != group_.K || f.group().d != group_.d)
    throw std::invalid_argument("CyclicSystem: grid function has a different shape");
}

GridFunction CyclicSystem::apply_walk(const GridFunction& f, int axis) const {
  check_axis(axis);
  check_shape(f);
  const int K = group_.K;
  const std::size_t st = stride_[axis];
  const auto& in = f.values();
  CVec out(in.size(), cplx(0.0, 0.0));
  for (std::size_t x = 0; x < in.size(); ++x) {
    const int xa = static_cast<int>((x / st) % static_cast<std::size_t>(K));
    cplx acc = 0.0;
    for (const auto& [y, w] : mu_.support()) {
      const int shifted = (xa + y) % K;
      acc += w * in[x + (static_cast<std::size_t>(shifted) - xa) * st];
    }
    out[x] = acc;
  }
  return GridFunction(group_, std::move(out));
}

GridFunction CyclicSystem::apply_walk_fft(const GridFunction& f, int axis) const {
  check_axis(axis);
  return apply_symbol(f, [this, axis](std::span<const int> xi) {
    return cplx(spec_.symbol[xi[axis]], 0.0);
  });
}

GridFunction CyclicSystem::heat(double t, const GridFunction& f) const {
  std::vector<int> axes(group_.d);
  std::iota(axes.begin(), axes.end(), 0);
  return heat(t, f, axes);
}

GridFunction CyclicSystem::heat(double t, const GridFunction& f,
                                std::span<const int> axes) const {
  if (t < 0.0) throw std::domain_error("heat: t must be >= 0");
  for (int a : axes) check_axis(a);
  return apply_symbol(f, [this, t, axes](std::span<const int> xi) {
    double s = 0.0;
    for (int a : axes) s += spec_.lambda[xi[a]];
    return cplx(std::exp(-t * s), 0.0);
  });
}

GridFunction CyclicSystem::heat_series(double t, const GridFunction& f, int terms) const {
  if (t < 0.0) throw std::domain_error("heat_series: t must be >= 0");
  check_shape(f);
  GridFunction g = f;
  for (int a = 0; a < group_.d; ++a) {
    GridFunction acc = GridFunction::zeros(group_);
    GridFunction pk = g;
    double coeff = std::exp(-t);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.values()[i] = coeff * pk.values()[i];
    for (int n = 1; n <= terms; ++n) {
      pk = apply_walk(pk, a);
      coeff *= t / n;
      for (std::size_t i = 0; i < acc.size(); ++i) acc.values()[i] += coeff * pk.values()[i];
    }
    g = std::move(acc);
  }
  return g;
}

GridFunction CyclicSystem::partial_difference(int g0, const GridFunction& f, int axis) const {
  check_axis(axis);
  check_shape(f);
  const int K = group_.K;
  const int y = ((g0 % K) + K) % K;
  const std::size_t st = stride_[axis];
  const auto& in = f.values();
  CVec out(in.size());
  for (std::size_t x = 0; x < in.size(); ++x) {
    const int xa = static_cast<int>((x / st) % static_cast<std::size_t>(K));
    const int shifted = (xa + y) % K;
    out[x] = in[x + (static_cast<std::size_t>(shifted) - xa) * st] - in[x];
  }
  return GridFunction(group_, std::move(out));
}

GridFunction CyclicSystem::partial_difference_fft(int g0, const GridFunction& f,
                                                  int axis) const {
  check_axis(axis);
  const int K = group_.K;
  return apply_symbol(f, [K, g0, axis](std::span<const int> xi) {
    return std::polar(1.0, 2.0 * kPi * g0 * xi[axis] / K) - cplx(1.0, 0.0);
  });
}

GridFunction CyclicSystem::partial_difference_adjoint(int g0, const GridFunction& f,
                                                      int axis) const {
  check_axis(axis);
  check_shape(f);
  const int K = group_.K;
  const int y = ((-g0 % K) + K) % K;
  const std::size_t st = stride_[axis];
  const auto& in = f.values();
  CVec out(in.size());
  for (std::size_t x = 0; x < in.size(); ++x) {
    const int xa = static_cast<int>((x / st) % static_cast<std::size_t>(K));
    const int shifted = (xa + y) % K;
    out[x] = in[x + (static_cast<std::size_t>(shifted) - xa) * st] - in[x];
  }
  return GridFunction(group_, std::move(out));
}

GridFunction CyclicSystem::project_mean_zero(const GridFunction& f) const {
  check_shape(f);
  const cplx mean = pairwise_csum(f.values()) / static_cast<double>(f.size());
  CVec out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f.values()[i] - mean;
  return GridFunction(group_, std::move(out));
}

GridFunction CyclicSystem::project_axis_mean_zero(const GridFunction& f, int axis) const {
  check_axis(axis);
  check_shape(f);
  const int K = group_.K;
  const std::size_t st = stride_[axis];
  const auto& in = f.values();
  CVec out(in.size());
  for (std::size_t x = 0; x < in.size(); ++x) {
    const int xa = static_cast<int>((x / st) % static_cast<std::size_t>(K));
    const std::size_t base = x - static_cast<std::size_t>(xa) * st;
    cplx mean = 0.0;
    for (int y = 0; y < K; ++y) mean += in[base + static_cast<std::size_t>(y) * st];
    out[x] = in[x] - mean / static_cast<double>(K);
  }
  return GridFunction(group_, std::move(out));
}

CVec CyclicSystem::riesz_symbol(int g0, int axis) const {
  check_axis(axis);
  return build_symbol([this, g0, axis](std::span<const int> xi) -> cplx {
    double s = 0.0;
    bool all_zero = true;
    for (int a = 0; a < group_.d; ++a) {
      s += spec_.lambda[xi[a]];
      if (xi[a] != 0) all_zero = false;
    }
    if (all_zero) return 0.0;
    const cplx num = std::polar(1.0, 2.0 * kPi * g0 * xi[axis] / group_.K) - cplx(1.0, 0.0);
    return num / std::sqrt(s);
  });
}

CVec CyclicSystem::one_dim_symbol(int g0, int axis) const {
  check_axis(axis);
  return build_symbol([this, g0, axis](std::span<const int> xi) -> cplx {
    if (xi[axis] == 0) return 0.0;
    const cplx num = std::polar(1.0, 2.0 * kPi * g0 * xi[axis] / group_.K) - cplx(1.0, 0.0);
    return num / std::sqrt(spec_.lambda[xi[axis]]);
  });
}

CVec CyclicSystem::joint_factor_symbol(int axis, double sigma, double eps) const {
  check_axis(axis);
  if (!(sigma > 0.0)) throw std::domain_error("joint_factor: sigma must be > 0");
  if (eps < 0.0) throw std::domain_error("joint_factor: eps must be >= 0");
  return build_symbol([this, axis, sigma, eps](std::span<const int> xi) -> cplx {
    if (xi[axis] == 0) return 0.0;  // Pi_{0,r}
    double s = 0.0;
    for (int a = 0; a < group_.d; ++a) s += spec_.lambda[xi[a]];
    const double num = spec_.lambda[xi[axis]] + eps;
    const double den = s + group_.d * eps;
    return cplx(std::pow(num / den, sigma), 0.0);
  });
}

GridFunction CyclicSystem::riesz_transform(int g0, int axis, const GridFunction& f) const {
  return apply_precomputed(f, riesz_symbol(g0, axis));
}

GridFunction CyclicSystem::riesz_one_dim(int g0, int axis, const GridFunction& f) const {
  return apply_precomputed(f, one_dim_symbol(g0, axis));
}

GridFunction CyclicSystem::joint_factor(int axis, double sigma, double eps,
                                        const GridFunction& f) const {
  return apply_precomputed(f, joint_factor_symbol(axis, sigma, eps));
}

GridFunction CyclicSystem::square_function(int g0, const GridFunction& f) const {
  check_shape(f);
  std::vector<double> acc(f.size(), 0.0);
  for (int a = 0; a < group_.d; ++a) {
    const GridFunction rf = riesz_transform(g0, a, f);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(rf.values()[i]);
  }
  CVec out(f.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = std::sqrt(acc[i]);
  return GridFunction(group_, std::move(out));
}

MultiplierSup CyclicSystem::riesz_multiplier_sup(int g0, int axis) const {
  check_axis(axis);
  const int K = group_.K, d = group_.d;
  std::vector<int> radix(d, K), xi(d, 0);
  MultiplierSup best;
  best.value = -1.0;
  do {
    double s = 0.0;
    bool all_zero = true;
    for (int a = 0; a < d; ++a) {
      s += spec_.lambda[xi[a]];
      if (xi[a] != 0) all_zero = false;
    }
    if (all_zero) continue;
    const double num = 2.0 * std::fabs(std::sin(kPi * g0 * xi[axis] / K));
    const double v = num / std::sqrt(s);
    if (v > best.value) {
      best.value = v;
      best.argmax.assign(xi.begin(), xi.end());
    }
  } while (next_index(xi, radix));
  return best;
}

MultiplierSup CyclicSystem::one_dim_multiplier_sup(int g0, int axis) const {
  check_axis(axis);
  const int K = group_.K;
  MultiplierSup best;
  best.value = -1.0;
  for (int x = 1; x < K; ++x) {
    const double num = 2.0 * std::fabs(std::sin(kPi * g0 * x / K));
    const double v = num / std::sqrt(spec_.lambda[x]);
    if (v > best.value) {
      best.value = v;
      best.argmax.assign(group_.d, 0);
      best.argmax[axis] = x;
    }
  }
  return best;
}

std::size_t CyclicSystem::kernel_tuple_count(double tol) const {
  const int K = group_.K, d = group_.d;
  std::vector<int> radix(d, K), xi(d, 0);
  std::size_t count = 0;
  do {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += spec_.lambda[xi[a]];
    if (s < tol) ++count;
  } while (next_index(xi, radix));
  return count;
}

DoubleDiffReport CyclicSystem::double_difference_check(int g0, std::uint64_t seed) const {
  DoubleDiffReport report;
  report.mu_is_nearest_neighbor = mu_.is_nearest_neighbor(g0);
  const std::size_t n = group_.size();
  const bool full_basis = n <= 4096;
  const std::size_t trials = full_basis ? n : 64;
  Rng rng(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const GridFunction f = full_basis ? GridFunction::basis(group_, trial)
                                      : GridFunction::random_normal(group_, rng);
    if (trial == 0) report.worst_input = f.values();
    for (int a = 0; a < group_.d; ++a) {
      const GridFunction lhs =
          partial_difference(g0, partial_difference_adjoint(g0, f, a), a);
      const GridFunction pf = apply_walk(f, a);
      for (std::size_t i = 0; i < n; ++i) {
        const cplx rhs = 2.0 * (f.values()[i] - pf.values()[i]);
        const double dev = std::abs(lhs.values()[i] - rhs);
        if (dev > report.max_deviation) {
          report.max_deviation = dev;
          report.worst_input = f.values();
        }
      }
    }
  }
  return report;
}

CVec CyclicSystem::build_symbol(const Symbol& symbol) const {
  const int K = group_.K, d = group_.d;
  std::vector<int> radix(d, K), xi(d, 0);
  CVec m(group_.size());
  std::size_t flat = 0;
  do {
    m[flat++] = symbol(xi);
  } while (next_index(xi, radix));
  return m;
}

GridFunction CyclicSystem::apply_precomputed(const GridFunction& f,
                                             std::span<const cplx> symbol) const {
  check_shape(f);
  if (symbol.size() != f.size())
    throw std::invalid_argument("apply_precomputed: symbol size mismatch");
  CVec data = f.values();
  dft_->forward(data);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= symbol[i];
  dft_->backward(data);
  return GridFunction(group_, std::move(data));
}

GridFunction CyclicSystem::apply_symbol(const GridFunction& f, const Symbol& symbol) const {
  return apply_precomputed(f, build_symbol(symbol));
}

GridFunction CyclicSystem::fourier_mode(std::span<const int> xi) const {
  if (static_cast<int>(xi.size()) != group_.d)
    throw std::invalid_argument("fourier_mode: tuple length != d");
  const int K = group_.K, d = group_.d;
  std::vector<int> radix(d, K), x(d, 0);
  CVec v(group_.size());
  std::size_t flat = 0;
  do {
    long phase = 0;
    for (int a = 0; a < d; ++a) phase += static_cast<long>(x[a]) * xi[a];
    v[flat++] = std::polar(1.0, 2.0 * kPi * (phase % K) / K);
  } while (next_index(x, radix));
  return GridFunction(group_, std::move(v));
}

}  // namespace rieszlab
