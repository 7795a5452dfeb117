#include "rieszlab/hermite.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace rieszlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<int> radices(const HermiteTruncation& t) {
  return std::vector<int>(t.d, t.N + 1);
}

// mode-n product: contract `axis` of the row-major tensor `in` (extents dims)
// with the rows x cols matrix M (row-major), replacing the axis extent.
CVec mode_apply(const CVec& in, std::span<const int> dims, int axis,
                std::span<const double> M, int rows) {
  const int cols = dims[axis];
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(dims[a]);
  for (std::size_t a = axis + 1; a < dims.size(); ++a)
    inner *= static_cast<std::size_t>(dims[a]);
  CVec out(outer * static_cast<std::size_t>(rows) * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (int j = 0; j < rows; ++j) {
      for (std::size_t i = 0; i < inner; ++i) {
        cplx acc = 0.0;
        for (int k = 0; k < cols; ++k)
          acc += M[static_cast<std::size_t>(j) * cols + k] *
                 in[(o * cols + k) * inner + i];
        out[(o * rows + j) * inner + i] = acc;
      }
    }
  }
  return out;
}

}  // namespace

HermiteTruncation::HermiteTruncation(int d_, int N_, std::size_t cap)
    : d(d_), N(N_), max_points(cap) {
  if (d < 1) throw std::invalid_argument("HermiteTruncation: d must be >= 1");
  if (N < 1) throw std::invalid_argument("HermiteTruncation: N must be >= 1");
  std::size_t n = 1;
  const auto base = static_cast<std::size_t>(N) + 1;
  for (int a = 0; a < d; ++a) {
    if (n > max_points / base)
      throw std::invalid_argument("HermiteTruncation: (N+1)^d exceeds the memory cap");
    n *= base;
  }
  size_ = n;
}

CoeffTensor::CoeffTensor(HermiteTruncation trunc, CVec coeffs)
    : trunc_(trunc), c_(std::move(coeffs)) {
  if (c_.size() != trunc_.size())
    throw std::invalid_argument("CoeffTensor: coefficient count != (N+1)^d");
}

CoeffTensor CoeffTensor::zeros(const HermiteTruncation& t) {
  return CoeffTensor(t, CVec(t.size(), cplx(0.0, 0.0)));
}

std::size_t CoeffTensor::flat_index(const HermiteTruncation& t, std::span<const int> k) {
  if (static_cast<int>(k.size()) != t.d)
    throw std::invalid_argument("CoeffTensor: multi-index length != d");
  std::size_t flat = 0;
  for (int a = 0; a < t.d; ++a) {
    if (k[a] < 0 || k[a] > t.N)
      throw std::invalid_argument("CoeffTensor: multi-index out of range");
    flat = flat * static_cast<std::size_t>(t.N + 1) + static_cast<std::size_t>(k[a]);
  }
  return flat;
}

CoeffTensor CoeffTensor::basis(const HermiteTruncation& t, std::span<const int> k) {
  CVec c(t.size(), cplx(0.0, 0.0));
  c[flat_index(t, k)] = 1.0;
  return CoeffTensor(t, std::move(c));
}

CoeffTensor CoeffTensor::random_normal(const HermiteTruncation& t, Rng& rng) {
  return CoeffTensor(t, rng.complex_normal_vec(t.size()));
}

QuadratureRule QuadratureRule::gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double b = std::sqrt((i + 1) / 2.0);
    J(i, i + 1) = b;
    J(i + 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_hermite: eigensolver failed");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(kPi);  // integral of exp(-x^2)
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  // enforce the exact node symmetry the eigensolver delivers only approximately
  const double scale = std::max(1.0, std::fabs(rule.nodes.back()));
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    if (std::fabs(rule.nodes[i] + rule.nodes[j]) > 1e-14 * scale)
      throw std::runtime_error("gauss_hermite: nodes fail the symmetry tolerance");
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  double wsum = 0.0;
  for (double w : rule.weights) {
    if (!(w > 0.0)) throw std::runtime_error("gauss_hermite: nonpositive weight");
    wsum += w;
  }
  if (std::fabs(wsum - mu0) > 1e-12)
    throw std::runtime_error("gauss_hermite: weights do not sum to sqrt(pi)");
  return rule;
}

std::vector<double> hermite_values(int N, double x) {
  std::vector<double> v(static_cast<std::size_t>(N) + 1);
  v[0] = 0.7511255444649425;  // pi^(-1/4)
  if (N >= 1) v[1] = x * std::sqrt(2.0) * v[0];
  for (int k = 1; k < N; ++k)
    v[k + 1] = x * std::sqrt(2.0 / (k + 1)) * v[k] - std::sqrt(k / (k + 1.0)) * v[k - 1];
  return v;
}

CoeffTensor apply_ou_multiplier(const JointMultiplier& m, const CoeffTensor& c) {
  const auto& t = c.trunc();
  std::vector<int> radix = radices(t), k(t.d, 0);
  std::vector<double> lambda(t.d);
  CVec out(c.size());
  std::size_t flat = 0;
  do {
    for (int a = 0; a < t.d; ++a) lambda[a] = 2.0 * k[a];
    out[flat] = m(lambda) * c.values()[flat];
    ++flat;
  } while (next_index(k, radix));
  return CoeffTensor(t, std::move(out));
}

namespace {

// shared shift kernel: out[m] = weight(m) * c[m + e_axis], weight given the
// destination index m (weight sees m_r = m[axis])
template <typename WeightFn>
CoeffTensor shift_down(int axis, const CoeffTensor& c, WeightFn&& weight) {
  const auto& t = c.trunc();
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  std::vector<int> radix = radices(t), m(t.d, 0);
  CVec out(c.size(), cplx(0.0, 0.0));
  std::size_t inner = 1;
  for (int a = axis + 1; a < t.d; ++a) inner *= static_cast<std::size_t>(t.N + 1);
  std::size_t flat = 0;
  do {
    if (m[axis] < t.N) out[flat] = weight(m) * c.values()[flat + inner];
    ++flat;
  } while (next_index(m, radix));
  return CoeffTensor(t, std::move(out));
}

}  // namespace

CoeffTensor apply_delta(int axis, const CoeffTensor& c) {
  return shift_down(axis, c, [axis](std::span<const int> m) {
    return std::sqrt(2.0 * (m[axis] + 1));
  });
}

CoeffTensor apply_delta_star(int axis, const CoeffTensor& c) {
  const auto& t = c.trunc();
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  std::vector<int> radix = radices(t), m(t.d, 0);
  CVec out(c.size(), cplx(0.0, 0.0));
  std::size_t inner = 1;
  for (int a = axis + 1; a < t.d; ++a) inner *= static_cast<std::size_t>(t.N + 1);
  std::size_t flat = 0;
  do {
    if (m[axis] > 0) out[flat] = std::sqrt(2.0 * m[axis]) * c.values()[flat - inner];
    ++flat;
  } while (next_index(m, radix));
  return CoeffTensor(t, std::move(out));
}

CoeffTensor apply_riesz_hermite(int axis, const CoeffTensor& c) {
  const int d = c.trunc().d;
  return shift_down(axis, c, [axis, d](std::span<const int> m) {
    long total = 0;
    for (int a = 0; a < d; ++a) total += m[a];
    return std::sqrt(2.0 * (m[axis] + 1)) / std::sqrt(2.0 * (total + 1));
  });
}

CoeffTensor apply_riesz_hermite_factored(int axis, const CoeffTensor& c) {
  CoeffTensor g = hermite_joint_factor(axis, 0.5, 0.0, c);
  // delta_r L_r^(-1/2) Pi_{0,r}
  const auto& t = g.trunc();
  std::vector<int> radix = radices(t), k(t.d, 0);
  CVec scaled(g.size());
  std::size_t flat = 0;
  do {
    scaled[flat] = k[axis] == 0 ? cplx(0.0, 0.0)
                                : g.values()[flat] / std::sqrt(2.0 * k[axis]);
    ++flat;
  } while (next_index(k, radix));
  return apply_delta(axis, CoeffTensor(t, std::move(scaled)));
}

CoeffTensor apply_riesz_hermite_adjoint(int axis, const CoeffTensor& c) {
  const auto& t = c.trunc();
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  std::vector<int> radix = radices(t), k(t.d, 0);
  CVec out(c.size(), cplx(0.0, 0.0));
  std::size_t inner = 1;
  for (int a = axis + 1; a < t.d; ++a) inner *= static_cast<std::size_t>(t.N + 1);
  std::size_t flat = 0;
  do {
    if (k[axis] > 0) {
      long total = 0;
      for (int a = 0; a < t.d; ++a) total += k[a];
      out[flat] = std::sqrt(2.0 * k[axis]) / std::sqrt(2.0 * total) *
                  c.values()[flat - inner];
    }
    ++flat;
  } while (next_index(k, radix));
  return CoeffTensor(t, std::move(out));
}

CoeffTensor hermite_joint_factor(int axis, double sigma, double eps,
                                 const CoeffTensor& c) {
  const auto& t = c.trunc();
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  if (!(sigma > 0.0)) throw std::domain_error("hermite_joint_factor: sigma > 0");
  if (eps < 0.0) throw std::domain_error("hermite_joint_factor: eps >= 0");
  std::vector<int> radix = radices(t), k(t.d, 0);
  CVec out(c.size());
  std::size_t flat = 0;
  do {
    if (k[axis] == 0) {
      out[flat] = 0.0;  // Pi_{0,r}
    } else {
      long total = 0;
      for (int a = 0; a < t.d; ++a) total += k[a];
      const double num = 2.0 * k[axis] + eps;
      const double den = 2.0 * total + t.d * eps;
      out[flat] = std::pow(num / den, sigma) * c.values()[flat];
    }
    ++flat;
  } while (next_index(k, radix));
  return CoeffTensor(t, std::move(out));
}

double riesz_hermite_opnorm2(const HermiteTruncation& t, int axis) {
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  std::vector<int> radix(t.d, t.N + 1), k(t.d, 0);
  double best = 0.0;
  do {
    if (k[axis] == 0) continue;
    long total = 0;
    for (int a = 0; a < t.d; ++a) total += k[a];
    best = std::max(best, std::sqrt(static_cast<double>(k[axis]) / total));
  } while (next_index(k, radix));
  return best;
}

CVec synthesize(const CoeffTensor& c, const QuadratureRule& rule) {
  const auto& t = c.trunc();
  const int n = rule.size();
  if (n < t.N + 1) throw std::invalid_argument("synthesize: rule size < N + 1");
  std::vector<double> B(static_cast<std::size_t>(n) * (t.N + 1));
  for (int j = 0; j < n; ++j) {
    const auto v = hermite_values(t.N, rule.nodes[j]);
    std::copy(v.begin(), v.end(), B.begin() + static_cast<std::size_t>(j) * (t.N + 1));
  }
  CVec data = c.values();
  std::vector<int> dims(t.d, t.N + 1);
  for (int a = 0; a < t.d; ++a) {
    data = mode_apply(data, dims, a, B, n);
    dims[a] = n;
  }
  return data;
}

CoeffTensor analyze(std::span<const cplx> node_values, const HermiteTruncation& t,
                    const QuadratureRule& rule) {
  const int n = rule.size();
  if (n < t.N + 1) throw std::invalid_argument("analyze: rule size < N + 1");
  std::size_t expect = 1;
  for (int a = 0; a < t.d; ++a) expect *= static_cast<std::size_t>(n);
  if (node_values.size() != expect)
    throw std::invalid_argument("analyze: node tensor size mismatch");
  // A[k][j] = w_j * H~_k(x_j)
  std::vector<double> A(static_cast<std::size_t>(t.N + 1) * n);
  for (int j = 0; j < n; ++j) {
    const auto v = hermite_values(t.N, rule.nodes[j]);
    for (int k = 0; k <= t.N; ++k)
      A[static_cast<std::size_t>(k) * n + j] = rule.weights[j] * v[k];
  }
  CVec data(node_values.begin(), node_values.end());
  std::vector<int> dims(t.d, n);
  for (int a = 0; a < t.d; ++a) {
    data = mode_apply(data, dims, a, A, t.N + 1);
    dims[a] = t.N + 1;
  }
  return CoeffTensor(t, std::move(data));
}

LinearOperator hermite_node_riesz_operator(const HermiteTruncation& t,
                                           const QuadratureRule& rule, int axis,
                                           double p) {
  if (axis < 0 || axis >= t.d) throw std::invalid_argument("axis out of range");
  if (!(p > 1.0) || p == std::numeric_limits<double>::infinity())
    throw std::invalid_argument("hermite_node_riesz_operator: p in (1, inf)");
  const int n = rule.size();
  if (n < t.N + 1) throw std::invalid_argument("rule size < N + 1");

  struct Shared {
    HermiteTruncation t;
    QuadratureRule rule;
    int axis;
    std::vector<double> Bt;     // (N+1) x n, unweighted node->coeff
    std::vector<double> scale;  // tensor weight^(1/p)
    std::vector<double> iscale; // tensor weight^(-1/p)
    std::vector<double> adj;    // tensor weight^(1 - 1/p)
  };
  auto sh = std::make_shared<Shared>(Shared{t, rule, axis, {}, {}, {}, {}});
  sh->Bt.resize(static_cast<std::size_t>(t.N + 1) * n);
  for (int j = 0; j < n; ++j) {
    const auto v = hermite_values(t.N, rule.nodes[j]);
    for (int k = 0; k <= t.N; ++k)
      sh->Bt[static_cast<std::size_t>(k) * n + j] = v[k];
  }
  std::size_t total = 1;
  for (int a = 0; a < t.d; ++a) total *= static_cast<std::size_t>(n);
  if (total > t.max_points)
    throw std::invalid_argument("node tensor exceeds the memory cap");
  sh->scale.resize(total);
  sh->iscale.resize(total);
  sh->adj.resize(total);
  std::vector<int> radix(t.d, n), idx(t.d, 0);
  std::size_t flat = 0;
  do {
    double w = 1.0;
    for (int a = 0; a < t.d; ++a) w *= rule.weights[idx[a]];
    const double wp = std::pow(w, 1.0 / p);
    sh->scale[flat] = wp;
    sh->iscale[flat] = 1.0 / wp;
    sh->adj[flat] = w / wp;
    ++flat;
  } while (next_index(idx, radix));

  LinearOperator op;
  op.dim = total;
  // D_a S R (B^T W) D_a^-1 with a = w^(1/p): counting l^p norm == weighted norm
  op.apply = [sh](std::span<const cplx> u) {
    CVec v(u.begin(), u.end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= sh->iscale[i];
    const CoeffTensor c = analyze(v, sh->t, sh->rule);
    CVec out = synthesize(apply_riesz_hermite(sh->axis, c), sh->rule);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sh->scale[i];
    return out;
  };
  // adjoint: D_a^-1 W S R* B^T D_a; the two right scalings fold to w^(1-1/p)
  op.adjoint = [sh, n](std::span<const cplx> u) {
    CVec v(u.begin(), u.end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= sh->scale[i];
    std::vector<int> dims(sh->t.d, n);
    for (int a = 0; a < sh->t.d; ++a) {
      v = mode_apply(v, dims, a, sh->Bt, sh->t.N + 1);
      dims[a] = sh->t.N + 1;
    }
    const CoeffTensor c(sh->t, std::move(v));
    CVec out = synthesize(apply_riesz_hermite_adjoint(sh->axis, c), sh->rule);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sh->adj[i];
    return out;
  };
  return op;
}

double quad_lp_norm(const CoeffTensor& c, double p, const QuadratureRule& rule) {
  if (!(p >= 1.0)) throw std::domain_error("quad_lp_norm: p must be >= 1");
  const auto& t = c.trunc();
  const CVec values = synthesize(c, rule);
  const int n = rule.size();

  if (p == std::numeric_limits<double>::infinity()) {
    double m = 0.0;
    for (const cplx& z : values) m = std::max(m, std::abs(z));
    return m;
  }

  // t_J = (prod_r w_{j_r})^(1/p) |f(x_J)|, summed with max scaling
  std::vector<double> wp(n);
  for (int j = 0; j < n; ++j) wp[j] = std::pow(rule.weights[j], 1.0 / p);
  std::vector<int> radix(t.d, n), idx(t.d, 0);
  std::vector<double> terms(values.size());
  std::size_t flat = 0;
  double tmax = 0.0;
  do {
    double w = 1.0;
    for (int a = 0; a < t.d; ++a) w *= wp[idx[a]];
    terms[flat] = w * std::abs(values[flat]);
    tmax = std::max(tmax, terms[flat]);
    ++flat;
  } while (next_index(idx, radix));
  if (tmax == 0.0) return 0.0;
  for (auto& v : terms) v = std::pow(v / tmax, p);
  return tmax * std::pow(pairwise_sum(terms), 1.0 / p);
}

}  // namespace rieszlab
