#include "rieszlab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace rieszlab {

ProductSpectrum::ProductSpectrum(std::vector<std::vector<double>> axes)
    : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("ProductSpectrum: no axes");
  for (const auto& ax : axes_) {
    if (ax.empty()) throw std::invalid_argument("ProductSpectrum: empty axis");
    for (double lam : ax) {
      if (!(lam >= 0.0))
        throw std::invalid_argument("ProductSpectrum: negative eigenvalue");
    }
  }
}

std::size_t ProductSpectrum::size() const {
  std::size_t n = 1;
  for (const auto& ax : axes_) n *= ax.size();
  return n;
}

cplx JointMultiplier::operator()(std::span<const double> lambda) const {
  double sum = 0.0;
  for (double lam : lambda) sum += lam;
  if (sum == 0.0) return zero_policy_;
  return eval_(lambda);
}

void SectorSpec::validate() const {
  constexpr double half_pi = 1.5707963267948966;
  for (double a : phi) {
    if (!(a > 0.0 && a <= half_pi))
      throw std::invalid_argument("SectorSpec: angle outside (0, pi/2]");
  }
  if (!(r_min > 0.0) || !(r_min < r_max))
    throw std::invalid_argument("SectorSpec: need 0 < r_min < r_max");
  if (angular < 2 || radial < 2)
    throw std::invalid_argument("SectorSpec: grid counts must be >= 2");
}

cplx eval_m_sigma(cplx z1, cplx z2, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("eval_m_sigma: sigma must be > 0");
  if (z1.real() < 0.0 || z2.real() < 0.0)
    throw std::domain_error("eval_m_sigma: arguments must lie in the right half-plane");
  if (z1 == cplx(0.0, 0.0)) return 0.0;
  const cplx sum = z1 + z2;
  if (sum == cplx(0.0, 0.0))
    throw std::domain_error("eval_m_sigma: z1 + z2 == 0");
  return std::exp(sigma * std::log(z1)) * std::exp(-sigma * std::log(sum));
}

CVec apply_diagonal(const JointMultiplier& mult, const ProductSpectrum& spectrum,
                    std::span<const cplx> coeffs) {
  if (coeffs.size() != spectrum.size())
    throw std::invalid_argument("apply_diagonal: coefficient/spectrum shape mismatch");
  const int d = spectrum.dim();
  std::vector<int> radix(d), idx(d, 0);
  for (int a = 0; a < d; ++a) radix[a] = static_cast<int>(spectrum.axis(a).size());

  CVec out(coeffs.size());
  std::vector<double> lambda(d);
  std::size_t flat = 0;
  do {
    for (int a = 0; a < d; ++a) lambda[a] = spectrum.axis(a)[idx[a]];
    out[flat] = mult(lambda) * coeffs[flat];
    ++flat;
  } while (next_index(idx, radix));
  return out;
}

SectorSup sector_sup(double sigma, const SectorSpec& spec) {
  if (!(sigma > 0.0)) throw std::domain_error("sector_sup: sigma must be > 0");
  spec.validate();

  // Per-coordinate sample sets: radii log-spaced inclusive of both ends,
  // angles linear inclusive of both ends.
  std::vector<double> radii(spec.radial), angles1(spec.angular), angles2(spec.angular);
  const double lmin = std::log(spec.r_min), lmax = std::log(spec.r_max);
  for (int i = 0; i < spec.radial; ++i)
    radii[i] = std::exp(lmin + (lmax - lmin) * i / (spec.radial - 1));
  for (int j = 0; j < spec.angular; ++j) {
    angles1[j] = -spec.phi[0] + 2.0 * spec.phi[0] * j / (spec.angular - 1);
    angles2[j] = -spec.phi[1] + 2.0 * spec.phi[1] * j / (spec.angular - 1);
  }

  SectorSup best;
  best.value = -1.0;
  for (double r1 : radii) {
    for (double t1 : angles1) {
      const cplx z1 = std::polar(r1, t1);
      for (double r2 : radii) {
        for (double t2 : angles2) {
          const cplx z2 = std::polar(r2, t2);
          if (z1 + z2 == cplx(0.0, 0.0)) continue;  // degenerate boundary tuple
          const double v = std::abs(eval_m_sigma(z1, z2, sigma));
          if (v > best.value) {
            best.value = v;
            best.argmax = {z1, z2};
          }
        }
      }
    }
  }
  return best;
}

double p_star(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::domain_error("p_star: p must lie in (1, inf)");
  return std::asin(std::fabs(2.0 / p - 1.0));
}

}  // namespace rieszlab
