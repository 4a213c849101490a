#pragma once

#include <cmath>

#include "pitomo/full_space.hpp"
#include "pitomo/sim.hpp"
#include "pitomo/spin_blocks.hpp"

namespace pitomo::testing {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double max_abs(const RealMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double max_abs(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

inline Matrix random_hermitian(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.complex_normal();
  return (g + g.adjoint()) / 2.0;
}

/// Random (generally non-PI) full-space density matrix, Hilbert-Schmidt.
inline Matrix random_full_state(int n_qubits, Rng& rng) {
  const int dim = 1 << n_qubits;
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.complex_normal();
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline double full_trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double max_block_diff(const SpinEnsemble& a, const SpinEnsemble& b) {
  double d = 0.0;
  for (std::size_t s = 0; s < a.blocks.size(); ++s) d = std::max(d, max_abs(Matrix(a.blocks[s] - b.blocks[s])));
  return d;
}

}  // namespace pitomo::testing
