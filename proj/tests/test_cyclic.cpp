#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "rieszlab/cyclic.hpp"
#include "rieszlab/pnorm.hpp"
#include "rieszlab/spectral.hpp"
#include "test_util.hpp"

using namespace rieszlab;
using rieszlab::test::max_abs_diff;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

cplx inner(const CVec& a, const CVec& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

CyclicSystem make(int K, int d) {
  return CyclicSystem(CyclicProductGroup(K, d), SymmetricMeasure::nearest_neighbor(K));
}

}  // namespace

TEST_CASE("group and measure validation") {
  CHECK_THROWS_AS(CyclicProductGroup(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(CyclicProductGroup(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(CyclicProductGroup(2, 30, std::size_t{1} << 24), std::invalid_argument);
  CHECK(CyclicProductGroup(4, 3).size() == 64);

  // delta_0 does not generate
  CHECK_THROWS_AS(SymmetricMeasure(4, {1.0, 0.0, 0.0, 0.0}), std::invalid_argument);
  // support {0,2} in Z_4 does not generate
  CHECK_THROWS_AS(SymmetricMeasure(4, {0.5, 0.0, 0.5, 0.0}), std::invalid_argument);
  // asymmetric
  CHECK_THROWS_AS(SymmetricMeasure(4, {0.0, 0.75, 0.0, 0.25}), std::invalid_argument);
  // wrong mass
  CHECK_THROWS_AS(SymmetricMeasure(4, {0.0, 0.25, 0.0, 0.25}), std::invalid_argument);
  // negative
  CHECK_THROWS_AS(SymmetricMeasure(4, {0.5, 0.75, 0.0, 0.75 - 1.0}), std::invalid_argument);

  CHECK(SymmetricMeasure::nearest_neighbor(4).is_nearest_neighbor(1));
  CHECK_FALSE(SymmetricMeasure::lazy(4).is_nearest_neighbor(1));
  // K = 2: mu_1 degenerates to delta_1
  const auto mu2 = SymmetricMeasure::nearest_neighbor(2, 1);
  CHECK(mu2.weights()[1] == 1.0);
}

TEST_CASE("walk symbol anchors") {
  const auto s4 = WalkSpectrum::from_measure(SymmetricMeasure::nearest_neighbor(4));
  CHECK(s4.lambda[0] == 0.0);  // exact by construction
  CHECK(s4.symbol[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s4.symbol[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s4.symbol[2] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s4.lambda[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s4.lambda[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s4.lambda[3] == doctest::Approx(1.0).epsilon(1e-15));

  const auto s3 = WalkSpectrum::from_measure(SymmetricMeasure::nearest_neighbor(3));
  CHECK(s3.symbol[1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s3.symbol[2] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s3.lambda[1] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("walk operator: constants, shift, and the FFT oracle") {
  const CyclicSystem sys = make(4, 2);
  const GridFunction ones = GridFunction::constant(sys.group(), 1.0);
  const GridFunction pf = sys.apply_walk(ones, 1);
  CHECK(max_abs_diff(pf.values(), ones.values()) < 1e-15);

  // K = 2: mu_1 = delta_1 acts as the swap
  const CyclicSystem sys2(CyclicProductGroup(2, 1), SymmetricMeasure::nearest_neighbor(2));
  const GridFunction e0 = GridFunction::basis(sys2.group(), 0);
  const GridFunction swapped = sys2.apply_walk(e0, 0);
  CHECK(swapped.values()[0] == cplx(0.0, 0.0));
  CHECK(swapped.values()[1] == cplx(1.0, 0.0));

  Rng rng(kDefaultSeed);
  for (const auto& [K, d] : std::vector<std::pair<int, int>>{{4, 2}, {5, 3}}) {
    const CyclicSystem s(CyclicProductGroup(K, d),
                         K == 4 ? SymmetricMeasure::nearest_neighbor(K)
                                : SymmetricMeasure::lazy(K));
    const GridFunction f = GridFunction::random_normal(s.group(), rng);
    for (int a = 0; a < d; ++a) {
      const GridFunction direct = s.apply_walk(f, a);
      const GridFunction fft = s.apply_walk_fft(f, a);
      CHECK(max_abs_diff(direct.values(), fft.values()) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(sys.apply_walk(ones, 2), std::invalid_argument);
  CHECK_THROWS_AS(sys.apply_walk(ones, -1), std::invalid_argument);
}

TEST_CASE("heat semigroup: identity, constants, contraction, series oracle") {
  const CyclicSystem sys = make(4, 2);
  Rng rng(kDefaultSeed + 1);
  const GridFunction f = GridFunction::random_normal(sys.group(), rng);

  CHECK(max_abs_diff(sys.heat(0.0, f).values(), f.values()) <= 1e-13);
  const GridFunction ones = GridFunction::constant(sys.group(), cplx(2.0, -1.0));
  for (double t : {0.1, 1.0, 10.0})
    CHECK(max_abs_diff(sys.heat(t, ones).values(), ones.values()) <= 1e-13);

  for (double t : {0.1, 1.0, 10.0}) {
    const GridFunction hf = sys.heat(t, f);
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf})
      CHECK(lp_norm(hf.values(), p) <= lp_norm(f.values(), p) * (1.0 + 1e-12));
    const GridFunction series = sys.heat_series(t, f, 60);
    CHECK(max_abs_diff(hf.values(), series.values()) <= 1e-10);
  }

  // semigroup law
  const GridFunction ts = sys.heat(0.7, sys.heat(0.55, f));
  const GridFunction sum = sys.heat(1.25, f);
  CHECK(max_abs_diff(ts.values(), sum.values()) <=
        1e-12 * lp_norm(f.values(), kInf));

  // axis-subset form
  const std::vector<int> axis0 = {0};
  const GridFunction h0 = sys.heat(0.3, f, axis0);
  const GridFunction h0ref = sys.apply_symbol(f, [&](std::span<const int> xi) {
    return cplx(std::exp(-0.3 * sys.spectrum().lambda[xi[0]]), 0.0);
  });
  CHECK(max_abs_diff(h0.values(), h0ref.values()) <= 1e-14);

  CHECK_THROWS_AS(sys.heat(-0.5, f), std::domain_error);
}

TEST_CASE("partial difference: formula, symbol oracle, adjoint") {
  const CyclicSystem sys1(CyclicProductGroup(4, 1), SymmetricMeasure::nearest_neighbor(4));
  const GridFunction e0 = GridFunction::basis(sys1.group(), 0);
  const GridFunction df = sys1.partial_difference(1, e0, 0);
  CHECK(df.values()[0] == cplx(-1.0, 0.0));
  CHECK(df.values()[1] == cplx(0.0, 0.0));
  CHECK(df.values()[2] == cplx(0.0, 0.0));
  CHECK(df.values()[3] == cplx(1.0, 0.0));

  const CyclicSystem sys = make(5, 2);
  const GridFunction c = GridFunction::constant(sys.group(), cplx(3.0, 1.0));
  CHECK(max_abs_diff(sys.partial_difference(2, c, 1).values(),
                     GridFunction::zeros(sys.group()).values()) == 0.0);

  Rng rng(kDefaultSeed + 2);
  const GridFunction f = GridFunction::random_normal(sys.group(), rng);
  const GridFunction g = GridFunction::random_normal(sys.group(), rng);
  for (int a = 0; a < 2; ++a) {
    CHECK(max_abs_diff(sys.partial_difference(1, f, a).values(),
                       sys.partial_difference_fft(1, f, a).values()) <= 1e-12);
    // <df, g> == <f, d*g>
    const cplx lhs = inner(sys.partial_difference(1, f, a).values(), g.values());
    const cplx rhs = inner(f.values(), sys.partial_difference_adjoint(1, g, a).values());
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("mean-removing projections") {
  const CyclicSystem sys = make(4, 3);
  Rng rng(kDefaultSeed + 3);
  const GridFunction f = GridFunction::random_normal(sys.group(), rng);
  const GridFunction g = GridFunction::random_normal(sys.group(), rng);

  const GridFunction c = GridFunction::constant(sys.group(), cplx(1.5, -2.0));
  CHECK(max_abs_diff(sys.project_mean_zero(c).values(),
                     GridFunction::zeros(sys.group()).values()) <= 1e-15);

  const GridFunction p0 = sys.project_mean_zero(f);
  CHECK(max_abs_diff(sys.project_mean_zero(p0).values(), p0.values()) <= 1e-13);
  cplx mean = 0.0;
  for (const cplx& z : p0.values()) mean += z;
  CHECK(std::abs(mean) / static_cast<double>(p0.size()) <= 1e-13);

  for (int a = 0; a < 3; ++a) {
    const GridFunction pa = sys.project_axis_mean_zero(f, a);
    CHECK(max_abs_diff(sys.project_axis_mean_zero(pa, a).values(), pa.values()) <= 1e-13);
    // Pi_{0,r} Pi_0 == Pi_{0,r}
    CHECK(max_abs_diff(sys.project_axis_mean_zero(p0, a).values(), pa.values()) <= 1e-13);
    // self-adjointness
    const cplx lhs = inner(pa.values(), g.values());
    const cplx rhs = inner(f.values(), sys.project_axis_mean_zero(g, a).values());
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    // partial o (I - Pi_{0,r}) == 0
    CVec rest(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      rest[i] = f.values()[i] - pa.values()[i];
    const GridFunction drest =
        sys.partial_difference(1, GridFunction(sys.group(), rest), a);
    CHECK(lp_norm(drest.values(), kInf) <= 1e-13);
  }
  const cplx lhs = inner(sys.project_mean_zero(f).values(), g.values());
  const cplx rhs = inner(f.values(), sys.project_mean_zero(g).values());
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("riesz transform: constants, sqrt2 norm for all K <= 64, factorization") {
  const CyclicSystem sys = make(4, 2);
  const GridFunction c = GridFunction::constant(sys.group(), 5.0);
  CHECK(lp_norm(sys.riesz_transform(1, 0, c).values(), kInf) <= 1e-14);

  // closed-form oracle: in d = 1 the multiplier modulus is sqrt(2) at every
  // nonzero frequency, so the sup equals sqrt(2) for every K
  for (int K = 2; K <= 64; ++K) {
    const CyclicSystem s1(CyclicProductGroup(K, 1), SymmetricMeasure::nearest_neighbor(K));
    CHECK(std::fabs(s1.riesz_multiplier_sup(1, 0).value - std::sqrt(2.0)) <= 1e-12);
  }

  Rng rng(kDefaultSeed + 4);
  for (int K : {2, 3, 4, 8}) {
    for (int d = 1; d <= 6; ++d) {
      if (K == 8 && d > 3) continue;  // the large-K high-d matrix runs in acceptance
      const CyclicSystem s(CyclicProductGroup(K, d), SymmetricMeasure::nearest_neighbor(K));
      const GridFunction f = GridFunction::random_normal(s.group(), rng);
      const double nf = lp_norm(f.values(), 2.0);
      for (int r = 0; r < d; ++r) {
        const GridFunction lhs = s.riesz_transform(1, r, f);
        const GridFunction rhs = s.riesz_one_dim(1, r, s.joint_factor(r, 0.5, 0.0, f));
        CVec diff(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
          diff[i] = lhs.values()[i] - rhs.values()[i];
        CHECK(lp_norm(diff, 2.0) / nf <= 1e-12);
      }
    }
  }
}

TEST_CASE("riesz multiplier sup is attained on the transform axis alone") {
  for (int K : {3, 4, 8})
    for (int d : {2, 3}) {
      const CyclicSystem s(CyclicProductGroup(K, d), SymmetricMeasure::nearest_neighbor(K));
      for (int r = 0; r < d; ++r) {
        const MultiplierSup sup = s.riesz_multiplier_sup(1, r);
        CHECK(sup.argmax[r] != 0);
        for (int a = 0; a < d; ++a)
          if (a != r) CHECK(sup.argmax[a] == 0);
      }
    }
}

TEST_CASE("riesz applied to a fourier mode reproduces the multiplier") {
  const CyclicSystem sys = make(8, 2);
  const MultiplierSup sup = sys.riesz_multiplier_sup(1, 0);
  const GridFunction mode = sys.fourier_mode(sup.argmax);
  const GridFunction rf = sys.riesz_transform(1, 0, mode);
  const double ratio = lp_norm(rf.values(), 2.0) / lp_norm(mode.values(), 2.0);
  CHECK(ratio == doctest::Approx(sup.value).epsilon(1e-12));
  CHECK(sup.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  // equality is attained at xi with only the transform axis nonzero
  CHECK(sup.argmax[1] == 0);
  CHECK(sup.argmax[0] != 0);
}

TEST_CASE("one-dimensional tensor riesz") {
  const CyclicSystem sys = make(6, 2);
  // f depending only on the other axis is annihilated
  CVec v(sys.group().size());
  for (int x0 = 0; x0 < 6; ++x0)
    for (int x1 = 0; x1 < 6; ++x1)
      v[static_cast<std::size_t>(x0) * 6 + x1] = std::polar(1.0, 0.9 * x1);
  const GridFunction f(sys.group(), v);
  CHECK(lp_norm(sys.riesz_one_dim(1, 0, f).values(), kInf) <= 1e-13);

  // d = 1: coincides with the full riesz
  const CyclicSystem s1(CyclicProductGroup(7, 1), SymmetricMeasure::nearest_neighbor(7));
  Rng rng(kDefaultSeed + 5);
  const GridFunction g = GridFunction::random_normal(s1.group(), rng);
  CHECK(max_abs_diff(s1.riesz_one_dim(1, 0, g).values(),
                     s1.riesz_transform(1, 0, g).values()) <= 1e-14);

  for (int K : {3, 4, 8})
    for (int d : {1, 2, 3}) {
      const CyclicSystem s(CyclicProductGroup(K, d), SymmetricMeasure::nearest_neighbor(K));
      for (int r = 0; r < d; ++r)
        CHECK(std::fabs(s.one_dim_multiplier_sup(1, r).value - std::sqrt(2.0)) <= 1e-12);
    }
}

TEST_CASE("joint factor: d=1 is the axis projection; multiplier matches m_sigma") {
  const CyclicSystem s1(CyclicProductGroup(5, 1), SymmetricMeasure::nearest_neighbor(5));
  Rng rng(kDefaultSeed + 6);
  const GridFunction f = GridFunction::random_normal(s1.group(), rng);
  CHECK(max_abs_diff(s1.joint_factor(0, 0.5, 0.0, f).values(),
                     s1.project_mean_zero(f).values()) <= 1e-13);
  // with eps > 0 in d = 1 the multiplier is still 1 off the zero frequency
  CHECK(max_abs_diff(s1.joint_factor(0, 0.5, 0.37, f).values(),
                     s1.project_mean_zero(f).values()) <= 1e-13);

  const CyclicSystem sys = make(4, 3);
  const auto& lam = sys.spectrum().lambda;
  for (double sigma : {0.5, 2.0}) {
    for (double eps : {0.0, 0.37}) {
      const CVec symbol = sys.joint_factor_symbol(1, sigma, eps);
      std::vector<int> radix(3, 4), xi(3, 0);
      std::size_t flat = 0;
      do {
        if (xi[1] != 0) {
          const double rest = lam[xi[0]] + lam[xi[2]];
          const cplx expect =
              eval_m_sigma(lam[xi[1]] + eps, rest + 2.0 * eps, sigma);
          CHECK(std::abs(symbol[flat] - expect) <= 1e-14);
        } else {
          CHECK(symbol[flat] == cplx(0.0, 0.0));
        }
        ++flat;
      } while (next_index(xi, radix));
    }
  }

  // sigma = 1/2 at the lambda-tuple (2,2): multiplier is 2^{-1/2}
  const CyclicSystem s2 = make(4, 2);
  const CVec sym = s2.joint_factor_symbol(0, 0.5, 0.0);
  CHECK(std::abs(sym[2 * 4 + 2] - 1.0 / std::sqrt(2.0)) <= 1e-15);
}

TEST_CASE("joint factor eps-limit decays") {
  const CyclicSystem sys = make(4, 3);
  Rng rng(kDefaultSeed + 7);
  GridFunction f = GridFunction::random_normal(sys.group(), rng);
  const double nf = lp_norm(f.values(), 2.0);
  for (auto& z : f.values()) z /= nf;
  const GridFunction base = sys.joint_factor(0, 0.5, 0.0, f);
  double prev = kInf;
  for (double eps : {0.1, 0.01, 0.001}) {
    const GridFunction reg = sys.joint_factor(0, 0.5, eps, f);
    CVec diff(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      diff[i] = reg.values()[i] - base.values()[i];
    const double dev = lp_norm(diff, 2.0);
    CHECK(dev < prev);
    CHECK(dev <= 10.0 * eps);  // ||.|| <= eps * C(f) with a modest constant
    prev = dev;
  }
}

TEST_CASE("double difference identity") {
  const CyclicSystem sys1(CyclicProductGroup(4, 1), SymmetricMeasure::nearest_neighbor(4));
  const DoubleDiffReport rep = sys1.double_difference_check(1);
  CHECK(rep.mu_is_nearest_neighbor);
  CHECK(rep.max_deviation <= 1e-14);

  const CyclicSystem lazy(CyclicProductGroup(4, 1), SymmetricMeasure::lazy(4));
  const DoubleDiffReport rep2 = lazy.double_difference_check(1);
  CHECK_FALSE(rep2.mu_is_nearest_neighbor);
  CHECK(rep2.max_deviation > 0.1);  // reported, not an error
}

TEST_CASE("square function") {
  const CyclicSystem s1(CyclicProductGroup(6, 1), SymmetricMeasure::nearest_neighbor(6));
  Rng rng(kDefaultSeed + 8);
  const GridFunction f1 = GridFunction::random_normal(s1.group(), rng);
  const GridFunction sf1 = s1.square_function(1, f1);
  const GridFunction r1 = s1.riesz_transform(1, 0, f1);
  for (std::size_t i = 0; i < f1.size(); ++i)
    CHECK(std::abs(sf1.values()[i] - std::abs(r1.values()[i])) <= 1e-14);

  const CyclicSystem sys = make(4, 3);
  const GridFunction c = GridFunction::constant(sys.group(), cplx(0.0, 4.0));
  CHECK(lp_norm(sys.square_function(1, c).values(), kInf) <= 1e-14);

  const GridFunction f = GridFunction::random_normal(sys.group(), rng);
  const GridFunction sf = sys.square_function(1, f);
  for (double p : {2.0, 4.0}) {
    double rhs = 0.0;
    for (int r = 0; r < 3; ++r) {
      const double nr = lp_norm(sys.riesz_transform(1, r, f).values(), p);
      rhs += nr * nr;
    }
    CHECK(lp_norm(sf.values(), p) <= std::sqrt(rhs) + 1e-12);
  }
}

TEST_CASE("parseval and kernel multiplicity") {
  const CyclicSystem sys = make(8, 2);
  Rng rng(kDefaultSeed + 9);
  const GridFunction f = GridFunction::random_normal(sys.group(), rng);
  CVec data = f.values();
  sys.dft().forward(data);
  const double parseval =
      lp_norm(data, 2.0) / std::sqrt(static_cast<double>(f.size()));
  CHECK(parseval == doctest::Approx(lp_norm(f.values(), 2.0)).epsilon(1e-13));
  sys.dft().backward(data);
  CHECK(max_abs_diff(data, f.values()) <=
        1e-13 * lp_norm(f.values(), kInf));

  for (int K : {2, 3, 4, 8, 16})
    for (int d : {1, 2, 3}) {
      const CyclicSystem nn(CyclicProductGroup(K, d), SymmetricMeasure::nearest_neighbor(K));
      CHECK(nn.kernel_tuple_count() == 1);
      const CyclicSystem lz(CyclicProductGroup(K, d), SymmetricMeasure::lazy(K));
      CHECK(lz.kernel_tuple_count() == 1);
    }
}
