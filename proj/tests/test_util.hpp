#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rieszlab/cyclic.hpp"
#include "rieszlab/pnorm.hpp"

namespace rieszlab::test {

/// Dense matrix (row-major, n x n) wrapped as a black-box operator.
inline LinearOperator dense_operator(CVec matrix, std::size_t n) {
  auto A = std::make_shared<CVec>(std::move(matrix));
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
  return op;
}

/// Fourier-multiplier operator on a cyclic system (adjoint = conjugate symbol).
inline LinearOperator symbol_operator(std::shared_ptr<const CyclicSystem> sys,
                                      CVec symbol) {
  auto sym = std::make_shared<CVec>(std::move(symbol));
  auto adj = std::make_shared<CVec>(*sym);
  for (auto& z : *adj) z = std::conj(z);
  LinearOperator op;
  op.dim = sys->group().size();
  op.apply = [sys, sym](std::span<const cplx> in) {
    GridFunction f(sys->group(), CVec(in.begin(), in.end()));
    return sys->apply_precomputed(f, *sym).values();
  };
  op.adjoint = [sys, adj](std::span<const cplx> in) {
    GridFunction f(sys->group(), CVec(in.begin(), in.end()));
    return sys->apply_precomputed(f, *adj).values();
  };
  return op;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace rieszlab::test
