#include "rieszlab/pnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rieszlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

cplx phase(cplx z) {
  const double a = std::abs(z);
  return a == 0.0 ? cplx(0.0, 0.0) : z / a;
}

// phi_q(v)_i = |v_i|^(q-1) * phase(v_i), applied to a max-normalized copy so
// large q does not overflow; callers only use the direction.
CVec dual_map(std::span<const cplx> v, double q) {
  double vmax = 0.0;
  for (const cplx& z : v) vmax = std::max(vmax, std::abs(z));
  CVec out(v.size(), cplx(0.0, 0.0));
  if (vmax == 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) / vmax;
    if (a > 0.0) out[i] = std::pow(a, q - 1.0) * phase(v[i]);
  }
  return out;
}

CVec basis_vector(std::size_t n, std::size_t j) {
  CVec e(n, cplx(0.0, 0.0));
  e[j] = 1.0;
  return e;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

}  // namespace

double lp_norm(std::span<const cplx> f, double p) {
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: p must be >= 1");
  if (f.empty()) return 0.0;
  double fmax = 0.0;
  for (const cplx& z : f) fmax = std::max(fmax, std::abs(z));
  if (p == kInf || fmax == 0.0) return fmax;
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    terms[i] = std::pow(std::abs(f[i]) / fmax, p);
  return fmax * std::pow(pairwise_sum(terms), 1.0 / p);
}

double witness_ratio(const LinearOperator& A, std::span<const cplx> x, double p) {
  const double nx = lp_norm(x, p);
  if (nx == 0.0) return 0.0;
  return lp_norm(A.apply(x), p) / nx;
}

bool adjoint_consistent(const LinearOperator& A, std::uint64_t seed) {
  if (!A.adjoint) return false;
  Rng rng(seed);
  const CVec x = rng.complex_normal_vec(A.dim);
  const CVec y = rng.complex_normal_vec(A.dim);
  const cplx lhs = inner(A.apply(x), y);
  const cplx rhs = inner(x, A.adjoint(y));
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
  return std::abs(lhs - rhs) <= 1e-10 * scale;
}

NormEstimate opnorm_exact(const LinearOperator& A, double p, double tol,
                          int maxiter, std::uint64_t seed) {
  NormEstimate est;
  est.p = p;
  if (p == 1.0 || p == kInf) {
    const bool row_mode = (p == kInf);
    if (row_mode && !A.adjoint)
      throw std::invalid_argument("opnorm_exact: p = inf requires the adjoint");
    est.method = row_mode ? "exact-inf" : "exact-1";
    double best = -1.0;
    std::size_t best_j = 0;
    CVec best_col;
    for (std::size_t j = 0; j < A.dim; ++j) {
      const CVec e = basis_vector(A.dim, j);
      CVec col = row_mode ? A.adjoint(e) : A.apply(e);
      const double s = lp_norm(col, 1.0);
      if (s > best) {
        best = s;
        best_j = j;
        best_col = std::move(col);
      }
    }
    est.lower = best;
    est.upper = best;  // column/row sums are the exact norm
    est.iterations = static_cast<int>(A.dim);
    est.converged = true;
    if (row_mode) {
      // witness: unimodular phases of the argmax row, ||x||_inf = 1
      CVec x(A.dim, cplx(1.0, 0.0));
      bool nonzero = false;
      for (std::size_t j = 0; j < A.dim; ++j) {
        if (std::abs(best_col[j]) > 0.0) {
          x[j] = phase(best_col[j]);
          nonzero = true;
        }
      }
      est.witness = nonzero ? std::move(x) : basis_vector(A.dim, best_j);
    } else {
      est.witness = basis_vector(A.dim, best_j);
    }
    return est;
  }
  if (p != 2.0)
    throw std::invalid_argument("opnorm_exact: p must be 1, 2 or inf");
  if (!A.adjoint)
    throw std::invalid_argument("opnorm_exact: p = 2 requires the adjoint");

  est.method = "exact-2";
  Rng rng(seed);
  CVec b = rng.complex_normal_vec(A.dim);
  double nb = lp_norm(b, 2.0);
  for (auto& z : b) z /= nb;
  double sigma_prev = -1.0;
  int stable = 0;
  for (int it = 0; it < maxiter; ++it) {
    est.iterations = it + 1;
    const CVec w = A.apply(b);
    const double sigma = lp_norm(w, 2.0);
    est.witness = b;
    est.lower = sigma;
    if (sigma == 0.0) {  // random vector annihilated: treat as null operator
      est.converged = true;
      break;
    }
    if (sigma_prev >= 0.0 &&
        std::fabs(sigma - sigma_prev) <= tol * std::max(sigma, 1e-300)) {
      if (++stable >= 3) {
        est.converged = true;
        break;
      }
    } else {
      stable = 0;
    }
    sigma_prev = sigma;
    CVec next = A.adjoint(w);
    const double nn = lp_norm(next, 2.0);
    if (nn == 0.0) {
      est.converged = true;
      break;
    }
    for (auto& z : next) z /= nn;
    b = std::move(next);
  }
  est.upper = est.lower * (1.0 + tol);
  return est;
}

NormEstimate boyd_estimate(const LinearOperator& A, double p, int restarts,
                           std::uint64_t seed, double tol, int maxiter,
                           const BoydObserver& observer) {
  if (!(p > 1.0) || p == kInf)
    throw std::invalid_argument("boyd_estimate: p must lie in (1, inf)");
  if (restarts < 1) throw std::invalid_argument("boyd_estimate: restarts >= 1");
  if (!A.adjoint || !adjoint_consistent(A, seed))
    throw std::invalid_argument("boyd_estimate: adjoint validation failed");

  const double q = p / (p - 1.0);
  NormEstimate est;
  est.p = p;
  est.method = "boyd";
  est.lower = -1.0;
  est.converged = true;

  for (int restart = 0; restart < restarts; ++restart) {
    CVec x;
    if (restart == 0) {
      x.assign(A.dim, cplx(1.0, 0.0));
    } else {
      Rng rng(seed + static_cast<std::uint64_t>(restart));
      x = rng.complex_normal_vec(A.dim);
    }
    double nx = lp_norm(x, p);
    for (auto& z : x) z /= nx;

    double best_ratio = -1.0;
    CVec best_x;
    double prev = -1.0;
    int stable = 0;
    bool converged = false;
    int it = 0;
    for (; it < maxiter; ++it) {
      const CVec y = A.apply(x);
      const double ratio = lp_norm(y, p);  // ||x||_p == 1
      if (observer) observer(restart, it, ratio);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_x = x;
      }
      if (ratio == 0.0) {  // stationary at zero (start in the kernel)
        converged = true;
        break;
      }
      if (prev >= 0.0 && std::fabs(ratio - prev) <= tol * std::max(ratio, 1e-300)) {
        if (++stable >= 3) {
          converged = true;
          break;
        }
      } else {
        stable = 0;
      }
      prev = ratio;
      const CVec s = dual_map(y, p);
      const CVec z = A.adjoint(s);
      CVec next = dual_map(z, q);
      const double nn = lp_norm(next, p);
      if (nn == 0.0) {
        converged = true;
        break;
      }
      for (auto& v : next) v /= nn;
      x = std::move(next);
    }
    est.iterations += it;
    if (!converged) est.converged = false;
    if (best_ratio > est.lower) {  // strict: ties keep the lowest restart index
      est.lower = best_ratio;
      est.witness = std::move(best_x);
    }
  }
  return est;
}

namespace {

struct GridBest {
  double value = -1.0;
  std::vector<double> angles;
};

std::vector<double> unit_direction(std::span<const double> angles, int n) {
  if (n == 1) return {1.0};
  if (n == 2) return {std::cos(angles[0]), std::sin(angles[0])};
  return {std::sin(angles[0]) * std::cos(angles[1]),
          std::sin(angles[0]) * std::sin(angles[1]), std::cos(angles[0])};
}

double ratio_at(std::span<const double> matrix, int n, double p,
                std::span<const double> v) {
  CVec x(n), y(n, cplx(0.0, 0.0));
  for (int i = 0; i < n; ++i) x[i] = v[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) y[i] += matrix[i * n + j] * v[j];
  const double nx = lp_norm(x, p);
  return nx == 0.0 ? 0.0 : lp_norm(y, p) / nx;
}

GridBest sweep(std::span<const double> matrix, int n, double p,
               std::span<const double> lo, std::span<const double> hi,
               std::span<const int> counts, std::vector<double>* values = nullptr) {
  const int adim = n - 1;
  GridBest best;
  std::vector<int> idx(adim, 0);
  std::vector<double> angles(adim);
  do {
    for (int a = 0; a < adim; ++a) {
      angles[a] = counts[a] == 1
                      ? lo[a]
                      : lo[a] + (hi[a] - lo[a]) * idx[a] / (counts[a] - 1);
    }
    const auto v = unit_direction(angles, n);
    const double val = ratio_at(matrix, n, p, v);
    if (values) values->push_back(val);
    if (val > best.value) {
      best.value = val;
      best.angles = angles;
    }
  } while (next_index(idx, counts));
  return best;
}

// indices of grid points that dominate their lattice neighborhood (the grids
// parametrize closed curves/surfaces, so neighbors wrap)
std::vector<std::size_t> local_maxima(const std::vector<double>& values, int n, int grid) {
  std::vector<std::size_t> out;
  if (n == 2) {
    for (int i = 0; i < grid; ++i) {
      const double v = values[i];
      if (v >= values[(i + 1) % grid] && v >= values[(i + grid - 1) % grid])
        out.push_back(i);
    }
    return out;
  }
  const auto at = [&](int i, int j) {
    return values[static_cast<std::size_t>(i) * grid + j];
  };
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double v = at(i, j);
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          if (ii < 0 || ii >= grid) continue;  // theta endpoints clamp
          if (v < at(ii, (j + dj + grid) % grid)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.push_back(static_cast<std::size_t>(i) * grid + j);
    }
  }
  return out;
}

}  // namespace

NormEstimate brute_small(std::span<const double> matrix, int n, double p,
                         int grid, double refine_tol) {
  if (n < 1 || n > 3) throw std::invalid_argument("brute_small: n must be 1..3");
  if (matrix.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("brute_small: matrix size mismatch");
  if (grid < 8) throw std::invalid_argument("brute_small: grid too coarse");

  NormEstimate est;
  est.p = p;
  est.method = "brute";
  if (n == 1) {
    est.lower = std::fabs(matrix[0]);
    est.witness = {cplx(1.0, 0.0)};
    est.converged = true;
    est.iterations = 1;
    return est;
  }

  constexpr double pi = 3.14159265358979323846;
  const int adim = n - 1;
  std::vector<double> lo(adim), hi(adim);
  std::vector<int> counts(adim, grid);
  lo[0] = 0.0;
  hi[0] = (n == 2) ? 2.0 * pi : pi;
  if (adim == 2) {
    lo[1] = 0.0;
    hi[1] = 2.0 * pi;
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid) * (adim == 2 ? grid : 1));
  sweep(matrix, n, p, lo, hi, counts, &values);
  const double global_spacing = (hi[0] - lo[0]) / (grid - 1);

  // refine the strongest distinct grid-local maxima: near-tied basins can put
  // the true norm in a basin whose grid sample is not the overall argmax
  std::vector<std::size_t> peaks = local_maxima(values, n, grid);
  std::sort(peaks.begin(), peaks.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (peaks.size() > 16) peaks.resize(16);

  est.iterations = 1;
  GridBest best;
  bool best_converged = false;
  const int local_n = 33;
  std::vector<int> local_counts(adim, local_n);
  for (std::size_t peak : peaks) {
    GridBest cand;
    cand.value = values[peak];
    cand.angles.resize(adim);
    if (adim == 1) {
      cand.angles[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(peak) / (grid - 1);
    } else {
      cand.angles[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(peak / grid) / (grid - 1);
      cand.angles[1] = lo[1] + (hi[1] - lo[1]) * static_cast<double>(peak % grid) / (grid - 1);
    }
    std::vector<double> spacing(adim, global_spacing);
    bool converged = false;
    // shrink only while the refined argmax stays interior, otherwise
    // re-center at the same width to follow a ridge
    for (int stage = 0; stage < 200; ++stage) {
      std::vector<double> llo(adim), lhi(adim);
      for (int a = 0; a < adim; ++a) {
        llo[a] = cand.angles[a] - 2.0 * spacing[a];
        lhi[a] = cand.angles[a] + 2.0 * spacing[a];
      }
      const GridBest refined = sweep(matrix, n, p, llo, lhi, local_counts);
      ++est.iterations;
      bool interior = true;
      for (int a = 0; a < adim; ++a) {
        const double step = (lhi[a] - llo[a]) / (local_n - 1);
        const double off = std::fabs(refined.angles[a] - llo[a]) / step;
        if (off < 0.5 || off > local_n - 1.5) interior = false;
      }
      const double change = refined.value - cand.value;
      if (refined.value > cand.value) cand = refined;
      if (interior) {
        if (std::fabs(change) < refine_tol) {
          converged = true;
          break;
        }
        for (int a = 0; a < adim; ++a) spacing[a] /= 8.0;
      }
    }
    // terminal polish: pattern search with diagonal moves, halving the step;
    // finishes off ridges and flat maxima the shrinking grid cannot resolve
    double h = global_spacing;
    std::vector<double> trial(adim);
    int evals = 0;
    while (h > 1e-15 && evals < 100000) {
      bool improved = false;
      std::vector<int> dir(adim, 0), radix(adim, 3);
      do {
        bool zero = true;
        for (int a = 0; a < adim; ++a)
          if (dir[a] != 1) zero = false;
        if (zero) continue;
        for (int a = 0; a < adim; ++a)
          trial[a] = cand.angles[a] + h * (dir[a] - 1);
        const auto v = unit_direction(trial, n);
        const double val = ratio_at(matrix, n, p, v);
        ++evals;
        if (val > cand.value) {
          cand.value = val;
          cand.angles = trial;
          improved = true;
        }
      } while (next_index(dir, radix));
      if (!improved) h *= 0.5;
    }
    if (cand.value > best.value) {
      best = cand;
      best_converged = converged || h <= 1e-15;
    }
  }
  est.converged = best_converged;

  const auto v = unit_direction(best.angles, n);
  est.witness.assign(v.begin(), v.end());
  est.lower = best.value;
  return est;
}

double interp_upper(double p, double p0, double bound0, double p1, double bound1) {
  if (!(bound0 > 0.0) || !(bound1 > 0.0))
    throw std::invalid_argument("interp_upper: bounds must be positive");
  const auto inv = [](double q) { return q == kInf ? 0.0 : 1.0 / q; };
  const double a = inv(p0), b = inv(p1), t = inv(p);
  if (t < std::min(a, b) - 1e-15 || t > std::max(a, b) + 1e-15)
    throw std::domain_error("interp_upper: p outside [p0, p1]");
  if (a == b) return std::min(bound0, bound1);
  const double theta = (t - a) / (b - a);
  return std::pow(bound0, 1.0 - theta) * std::pow(bound1, theta);
}

}  // namespace rieszlab
