#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "rieszlab/cyclic.hpp"
#include "rieszlab/hermite.hpp"
#include "rieszlab/pnorm.hpp"
#include "rieszlab/spectral.hpp"

namespace py = pybind11;
using namespace rieszlab;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

CVec to_vec(const ComplexArray& arr, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(arr.size()) != expected)
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(expected) + " values, got " +
                                std::to_string(arr.size()));
  const auto* ptr = arr.data();
  return CVec(ptr, ptr + arr.size());
}

py::array to_grid_array(const CVec& v, int K, int d) {
  std::vector<py::ssize_t> shape(d, K);
  py::array_t<std::complex<double>> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return std::move(out);
}

py::array to_tensor_array(const CVec& v, int N, int d) {
  std::vector<py::ssize_t> shape(d, N + 1);
  py::array_t<std::complex<double>> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return std::move(out);
}

/// Python-facing wrapper around the cyclic product system.
class PyCyclicSystem {
 public:
  PyCyclicSystem(int K, int d, const std::string& mu, int g0, std::size_t mem_cap)
      : g0_(g0),
        sys_(std::make_shared<CyclicSystem>(
            CyclicProductGroup(K, d, mem_cap),
            mu == "lazy" ? SymmetricMeasure::lazy(K, g0)
                         : SymmetricMeasure::nearest_neighbor(K, g0))) {}

  PyCyclicSystem(int K, int d, const std::vector<double>& weights, int g0,
                 std::size_t mem_cap)
      : g0_(g0),
        sys_(std::make_shared<CyclicSystem>(CyclicProductGroup(K, d, mem_cap),
                                            SymmetricMeasure(K, weights))) {}

  int K() const { return sys_->group().K; }
  int d() const { return sys_->group().d; }
  int g0() const { return g0_; }
  std::vector<double> lambda() const { return sys_->spectrum().lambda; }
  std::vector<double> symbol() const { return sys_->spectrum().symbol; }

  GridFunction wrap(const ComplexArray& f) const {
    return GridFunction(sys_->group(), to_vec(f, sys_->group().size(), "grid function"));
  }
  py::array unwrap(const GridFunction& f) const {
    return to_grid_array(f.values(), K(), d());
  }

  py::array walk(const ComplexArray& f, int axis, bool fft) const {
    return unwrap(fft ? sys_->apply_walk_fft(wrap(f), axis)
                      : sys_->apply_walk(wrap(f), axis));
  }
  py::array heat(double t, const ComplexArray& f) const {
    return unwrap(sys_->heat(t, wrap(f)));
  }
  py::array heat_series(double t, const ComplexArray& f, int terms) const {
    return unwrap(sys_->heat_series(t, wrap(f), terms));
  }
  py::array partial(const ComplexArray& f, int axis) const {
    return unwrap(sys_->partial_difference(g0_, wrap(f), axis));
  }
  py::array partial_adjoint(const ComplexArray& f, int axis) const {
    return unwrap(sys_->partial_difference_adjoint(g0_, wrap(f), axis));
  }
  py::array project_mean_zero(const ComplexArray& f) const {
    return unwrap(sys_->project_mean_zero(wrap(f)));
  }
  py::array project_axis_mean_zero(const ComplexArray& f, int axis) const {
    return unwrap(sys_->project_axis_mean_zero(wrap(f), axis));
  }
  py::array riesz(const ComplexArray& f, int axis) const {
    return unwrap(sys_->riesz_transform(g0_, axis, wrap(f)));
  }
  py::array riesz_one_dim(const ComplexArray& f, int axis) const {
    return unwrap(sys_->riesz_one_dim(g0_, axis, wrap(f)));
  }
  py::array joint_factor(const ComplexArray& f, int axis, double sigma, double eps) const {
    return unwrap(sys_->joint_factor(axis, sigma, eps, wrap(f)));
  }
  py::array square_function(const ComplexArray& f) const {
    return unwrap(sys_->square_function(g0_, wrap(f)));
  }
  std::pair<double, std::vector<int>> riesz_norm2(int axis) const {
    const MultiplierSup sup = sys_->riesz_multiplier_sup(g0_, axis);
    return {sup.value, sup.argmax};
  }
  std::size_t kernel_count(double tol) const { return sys_->kernel_tuple_count(tol); }
  std::pair<double, bool> double_difference_check() const {
    const DoubleDiffReport rep = sys_->double_difference_check(g0_);
    return {rep.max_deviation, rep.mu_is_nearest_neighbor};
  }

 private:
  int g0_;
  std::shared_ptr<CyclicSystem> sys_;
};

/// Python-facing wrapper around the truncated Hermite setting.
class PyHermiteSystem {
 public:
  PyHermiteSystem(int d, int N, std::size_t mem_cap) : trunc_(d, N, mem_cap) {}

  int d() const { return trunc_.d; }
  int N() const { return trunc_.N; }

  CoeffTensor wrap(const ComplexArray& c) const {
    return CoeffTensor(trunc_, to_vec(c, trunc_.size(), "coefficient tensor"));
  }
  py::array unwrap(const CoeffTensor& c) const {
    return to_tensor_array(c.values(), trunc_.N, trunc_.d);
  }

  py::array delta(const ComplexArray& c, int axis) const {
    return unwrap(apply_delta(axis, wrap(c)));
  }
  py::array delta_star(const ComplexArray& c, int axis) const {
    return unwrap(apply_delta_star(axis, wrap(c)));
  }
  py::array riesz(const ComplexArray& c, int axis) const {
    return unwrap(apply_riesz_hermite(axis, wrap(c)));
  }
  py::array riesz_factored(const ComplexArray& c, int axis) const {
    return unwrap(apply_riesz_hermite_factored(axis, wrap(c)));
  }
  py::array joint_factor(const ComplexArray& c, int axis, double sigma, double eps) const {
    return unwrap(hermite_joint_factor(axis, sigma, eps, wrap(c)));
  }
  py::array ou_multiplier(const ComplexArray& c,
                          const std::function<std::complex<double>(std::vector<double>)>& m,
                          std::complex<double> zero_policy) const {
    const JointMultiplier mult(
        [&m](std::span<const double> lam) {
          return m(std::vector<double>(lam.begin(), lam.end()));
        },
        zero_policy);
    return unwrap(apply_ou_multiplier(mult, wrap(c)));
  }
  double opnorm2(int axis) const { return riesz_hermite_opnorm2(trunc_, axis); }
  double lp_quad_norm(const ComplexArray& c, double p, int rule_size) const {
    return quad_lp_norm(wrap(c), p, QuadratureRule::gauss_hermite(rule_size));
  }

 private:
  HermiteTruncation trunc_;
};

NormEstimate matrix_norm(const ComplexArray& matrix, double p,
                         const std::string& method, int restarts,
                         std::uint64_t seed, double tol, int maxiter) {
  if (matrix.ndim() != 2 || matrix.shape(0) != matrix.shape(1))
    throw std::invalid_argument("expected a square matrix");
  const auto n = static_cast<std::size_t>(matrix.shape(0));
  auto A = std::make_shared<CVec>(to_vec(matrix, n * n, "matrix"));
  LinearOperator op;
  op.dim = n;
  op.apply = [A, n](std::span<const cplx> x) {
    CVec y(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y[i] += (*A)[i * n + j] * x[j];
    return y;
  };
  op.adjoint = [A, n](std::span<const cplx> x) {
    CVec y(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y[i] += std::conj((*A)[j * n + i]) * x[j];
    return y;
  };
  const bool exact_p = (p == 1.0 || p == 2.0 ||
                        p == std::numeric_limits<double>::infinity());
  if (method == "boyd" || (method == "auto" && !exact_p))
    return boyd_estimate(op, p, std::max(1, restarts), seed, tol, maxiter);
  if (method == "auto" || method == "exact")
    return opnorm_exact(op, p, tol, maxiter, seed);
  throw std::invalid_argument("method must be auto, exact or boyd");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "joint spectral multipliers, discrete Riesz transforms and "
            "operator p-norm estimation";

  m.def("m_sigma", &eval_m_sigma, py::arg("z1"), py::arg("z2"), py::arg("sigma"),
        "principal-branch multiplier z1^sigma (z1+z2)^(-sigma)");
  m.def("p_star", &p_star, py::arg("p"),
        "arcsin|2/p - 1|, the sector-angle threshold for p");
  m.def(
      "sector_sup",
      [](double sigma, double phi1, double phi2, int angular, int radial,
         double r_min, double r_max) {
        SectorSpec spec;
        spec.phi = {phi1, phi2};
        spec.angular = angular;
        spec.radial = radial;
        spec.r_min = r_min;
        spec.r_max = r_max;
        const SectorSup sup = sector_sup(sigma, spec);
        return std::make_pair(sup.value, std::make_pair(sup.argmax[0], sup.argmax[1]));
      },
      py::arg("sigma"), py::arg("phi1") = 0.7853981633974483,
      py::arg("phi2") = 0.7853981633974483, py::arg("angular") = 64,
      py::arg("radial") = 32, py::arg("r_min") = 1e-6, py::arg("r_max") = 1e6,
      "sampled sup of |m_sigma| over the polysector grid, with its argmax");

  py::class_<PyCyclicSystem>(m, "CyclicSystem",
                             "random walk, heat semigroup and Riesz transforms "
                             "on (Z_K)^d, diagonalized by the DFT")
      .def(py::init<int, int, const std::string&, int, std::size_t>(), py::arg("K"),
           py::arg("d"), py::arg("mu") = "nearest", py::arg("g0") = 1,
           py::arg("mem_cap") = std::size_t{1} << 24)
      .def(py::init<int, int, const std::vector<double>&, int, std::size_t>(),
           py::arg("K"), py::arg("d"), py::arg("weights"), py::arg("g0") = 1,
           py::arg("mem_cap") = std::size_t{1} << 24)
      .def_property_readonly("K", &PyCyclicSystem::K)
      .def_property_readonly("d", &PyCyclicSystem::d)
      .def_property_readonly("g0", &PyCyclicSystem::g0)
      .def("lam", &PyCyclicSystem::lambda, "laplacian eigenvalues per axis frequency")
      .def("symbol", &PyCyclicSystem::symbol, "walk-operator symbol per axis frequency")
      .def("walk", &PyCyclicSystem::walk, py::arg("f"), py::arg("axis") = 0,
           py::arg("fft") = false)
      .def("heat", &PyCyclicSystem::heat, py::arg("t"), py::arg("f"))
      .def("heat_series", &PyCyclicSystem::heat_series, py::arg("t"), py::arg("f"),
           py::arg("terms") = 60)
      .def("partial", &PyCyclicSystem::partial, py::arg("f"), py::arg("axis") = 0)
      .def("partial_adjoint", &PyCyclicSystem::partial_adjoint, py::arg("f"),
           py::arg("axis") = 0)
      .def("project_mean_zero", &PyCyclicSystem::project_mean_zero, py::arg("f"))
      .def("project_axis_mean_zero", &PyCyclicSystem::project_axis_mean_zero,
           py::arg("f"), py::arg("axis") = 0)
      .def("riesz", &PyCyclicSystem::riesz, py::arg("f"), py::arg("axis") = 0)
      .def("riesz_one_dim", &PyCyclicSystem::riesz_one_dim, py::arg("f"),
           py::arg("axis") = 0)
      .def("joint_factor", &PyCyclicSystem::joint_factor, py::arg("f"),
           py::arg("axis") = 0, py::arg("sigma") = 0.5, py::arg("eps") = 0.0)
      .def("square_function", &PyCyclicSystem::square_function, py::arg("f"))
      .def("riesz_norm2", &PyCyclicSystem::riesz_norm2, py::arg("axis") = 0,
           "exact l2 -> l2 norm of the Riesz transform with its argmax frequency")
      .def("kernel_count", &PyCyclicSystem::kernel_count, py::arg("tol") = 1e-14)
      .def("double_difference_check", &PyCyclicSystem::double_difference_check);

  py::class_<PyHermiteSystem>(m, "HermiteSystem",
                              "Ornstein-Uhlenbeck operators on truncated "
                              "Hermite coefficient tensors")
      .def(py::init<int, int, std::size_t>(), py::arg("d"), py::arg("N"),
           py::arg("mem_cap") = std::size_t{1} << 24)
      .def_property_readonly("d", &PyHermiteSystem::d)
      .def_property_readonly("N", &PyHermiteSystem::N)
      .def("delta", &PyHermiteSystem::delta, py::arg("c"), py::arg("axis") = 0)
      .def("delta_star", &PyHermiteSystem::delta_star, py::arg("c"), py::arg("axis") = 0)
      .def("riesz", &PyHermiteSystem::riesz, py::arg("c"), py::arg("axis") = 0)
      .def("riesz_factored", &PyHermiteSystem::riesz_factored, py::arg("c"),
           py::arg("axis") = 0)
      .def("joint_factor", &PyHermiteSystem::joint_factor, py::arg("c"),
           py::arg("axis") = 0, py::arg("sigma") = 0.5, py::arg("eps") = 0.0)
      .def("ou_multiplier", &PyHermiteSystem::ou_multiplier, py::arg("c"),
           py::arg("m"), py::arg("zero_policy") = std::complex<double>(0.0, 0.0))
      .def("opnorm2", &PyHermiteSystem::opnorm2, py::arg("axis") = 0)
      .def("quad_lp_norm", &PyHermiteSystem::lp_quad_norm, py::arg("c"), py::arg("p"),
           py::arg("rule_size"));

  m.def(
      "gauss_hermite",
      [](int n) {
        const QuadratureRule rule = QuadratureRule::gauss_hermite(n);
        return std::make_pair(rule.nodes, rule.weights);
      },
      py::arg("n"), "nodes and weights for the weight exp(-x^2)");

  py::class_<NormEstimate>(m, "NormEstimate")
      .def_readonly("p", &NormEstimate::p)
      .def_readonly("lower", &NormEstimate::lower)
      .def_property_readonly("upper",
                             [](const NormEstimate& e) {
                               return e.upper ? py::cast(*e.upper) : py::none().cast<py::object>();
                             })
      .def_readonly("method", &NormEstimate::method)
      .def_readonly("iterations", &NormEstimate::iterations)
      .def_readonly("converged", &NormEstimate::converged)
      .def_property_readonly("witness",
                             [](const NormEstimate& e) {
                               py::array_t<std::complex<double>> out(
                                   static_cast<py::ssize_t>(e.witness.size()));
                               std::copy(e.witness.begin(), e.witness.end(),
                                         out.mutable_data());
                               return out;
                             })
      .def("__repr__", [](const NormEstimate& e) {
        std::string s = "NormEstimate(p=" + std::to_string(e.p) +
                        ", lower=" + std::to_string(e.lower) + ", method=" + e.method +
                        ", converged=" + (e.converged ? "True" : "False") + ")";
        return s;
      });

  m.def("matrix_opnorm", &matrix_norm, py::arg("matrix"), py::arg("p"),
        py::arg("method") = "auto", py::arg("restarts") = 16,
        py::arg("seed") = kDefaultSeed, py::arg("tol") = 1e-9,
        py::arg("maxiter") = 2000,
        "operator p-norm bracket for a dense matrix: exact for p in {1, 2, inf}, "
        "Boyd lower bound otherwise");
  m.def(
      "lp_norm",
      [](const ComplexArray& f, double p) {
        const auto* ptr = f.data();
        return lp_norm(std::span<const cplx>(ptr, static_cast<std::size_t>(f.size())), p);
      },
      py::arg("f"), py::arg("p"));
  m.def("interp_upper", &interp_upper, py::arg("p"), py::arg("p0"), py::arg("bound0"),
        py::arg("p1"), py::arg("bound1"),
        "Riesz-Thorin upper bound between two anchors");

  m.attr("DEFAULT_SEED") = py::int_(kDefaultSeed);
  m.attr("__version__") = "0.1.0";
}
