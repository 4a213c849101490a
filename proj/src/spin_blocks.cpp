#include "pitomo/spin_blocks.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

namespace pitomo {

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i is exact at every step.
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") exceeds 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

int configured_max_qubits() {
  const char* env = std::getenv("PITOMO_MAX_QUBITS");
  if (env == nullptr) return kDefaultMaxQubits;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || value < 1 || value > kHardMaxQubits) return kDefaultMaxQubits;
  return static_cast<int>(value);
}

SpinSectorLayout::SpinSectorLayout(int n_qubits, int max_qubits) : n_qubits_(n_qubits) {
  if (max_qubits > kHardMaxQubits) max_qubits = kHardMaxQubits;
  if (n_qubits < 1 || n_qubits > max_qubits) {
    throw std::invalid_argument("number of qubits must lie in [1, " + std::to_string(max_qubits) +
                                "], got " + std::to_string(n_qubits));
  }
  for (int two_j = n_qubits % 2; two_j <= n_qubits; two_j += 2) {
    const int lower = (n_qubits - two_j) / 2;
    const std::uint64_t mult = binomial(n_qubits, lower) - binomial(n_qubits, lower - 1);
    two_js_.push_back(two_j);
    multiplicities_.push_back(mult);
    compressed_dim_ += two_j + 1;
  }
}

int SpinSectorLayout::sector_of(int two_j) const {
  if (!has_two_j(two_j)) {
    throw std::out_of_range("spin label two_j=" + std::to_string(two_j) + " not present for N=" +
                            std::to_string(n_qubits_));
  }
  return (two_j - n_qubits_ % 2) / 2;
}

bool SpinSectorLayout::has_two_j(int two_j) const {
  return two_j >= 0 && two_j <= n_qubits_ && (n_qubits_ - two_j) % 2 == 0;
}

int SpinSectorLayout::index_of_m(int sector, int two_m) const {
  const int tj = two_j(sector);
  if (two_m > tj || two_m < -tj || (tj - two_m) % 2 != 0) return -1;
  return (tj - two_m) / 2;
}

SpinEnsemble::SpinEnsemble(const SpinSectorLayout& l) : layout(l) {
  blocks.reserve(l.num_sectors());
  for (int s = 0; s < l.num_sectors(); ++s) {
    blocks.push_back(Matrix::Zero(l.block_dim(s), l.block_dim(s)));
  }
}

SpinEnsemble SpinEnsemble::zeros(const SpinSectorLayout& l) { return SpinEnsemble(l); }

SpinEnsemble SpinEnsemble::maximally_mixed(const SpinSectorLayout& l) {
  SpinEnsemble e(l);
  const double full_dim = std::ldexp(1.0, l.n_qubits());
  for (int s = 0; s < l.num_sectors(); ++s) {
    // p_j / (2j+1) = dim(K_j) / 2^N
    const double diag = static_cast<double>(l.multiplicity(s)) / full_dim;
    e.blocks[s] = Matrix::Identity(l.block_dim(s), l.block_dim(s)) * diag;
  }
  return e;
}

double SpinEnsemble::weight(int sector) const { return blocks.at(sector).trace().real(); }

double SpinEnsemble::total_trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

void SpinEnsemble::validate(double herm_tol, double psd_tol, double trace_tol) const {
  if (static_cast<int>(blocks.size()) != layout.num_sectors()) {
    throw std::domain_error("ensemble has " + std::to_string(blocks.size()) + " blocks, layout has " +
                            std::to_string(layout.num_sectors()));
  }
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const auto& b = blocks[s];
    if (b.rows() != layout.block_dim(s) || b.cols() != layout.block_dim(s)) {
      throw std::domain_error("block for two_j=" + std::to_string(layout.two_j(s)) +
                              " has wrong size");
    }
    if (!b.allFinite()) {
      throw std::domain_error("block for two_j=" + std::to_string(layout.two_j(s)) +
                              " has non-finite entries");
    }
    if (hermiticity_defect(b) > herm_tol) {
      throw std::domain_error("block for two_j=" + std::to_string(layout.two_j(s)) +
                              " is not Hermitian");
    }
    const double lo = min_eigenvalue(b);
    if (lo < -psd_tol) {
      std::ostringstream msg;
      msg << "block for two_j=" << layout.two_j(s) << " has negative eigenvalue " << lo;
      throw std::domain_error(msg.str());
    }
  }
  const double tr = total_trace();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream msg;
    msg << "ensemble trace is " << tr << ", expected 1";
    throw std::domain_error(msg.str());
  }
}

bool SpinEnsemble::is_valid() const {
  try {
    validate();
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

SpinOperators spin_operators(int two_j) {
  if (two_j < 0) throw std::invalid_argument("two_j must be non-negative");
  const int dim = two_j + 1;
  const double j = two_j / 2.0;
  SpinOperators ops;
  ops.two_j = two_j;
  ops.s_z = Matrix::Zero(dim, dim);
  ops.j_plus = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = j - i;
    ops.s_z(i, i) = m;
    // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>; m+1 sits at index i-1.
    if (i > 0) ops.j_plus(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  ops.j_minus = ops.j_plus.adjoint();
  ops.s_x = (ops.j_plus + ops.j_minus) * 0.5;
  ops.s_y = (ops.j_plus - ops.j_minus) * Complex(0.0, -0.5);
  return ops;
}

Matrix hermitian_expm(const Matrix& generator, double scale) {
  if (generator.rows() != generator.cols()) {
    throw std::invalid_argument("hermitian_expm: generator must be square");
  }
  if (hermiticity_defect(generator) > 1e-10) {
    throw std::invalid_argument("hermitian_expm: generator is not Hermitian");
  }
  if (generator.rows() == 0) return generator;
  const Matrix herm = (generator + generator.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    phases(i) = std::polar(1.0, -scale * lambda(i));
  }
  const Matrix& v = eig.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

SpinEnsemble dicke_ensemble(int n_qubits, int k_excitations) {
  if (k_excitations < 0 || k_excitations > n_qubits) {
    throw std::invalid_argument("Dicke excitation number must lie in [0, N]");
  }
  SpinSectorLayout layout(n_qubits);
  SpinEnsemble e(layout);
  // m = N/2 - k, index j - m = k in the symmetric block.
  e.blocks[layout.top_sector()](k_excitations, k_excitations) = 1.0;
  return e;
}

SpinEnsemble ghz_ensemble(int n_qubits) {
  SpinSectorLayout layout(n_qubits);
  SpinEnsemble e(layout);
  auto& top = e.blocks[layout.top_sector()];
  top(0, 0) = 0.5;
  top(0, n_qubits) = 0.5;
  top(n_qubits, 0) = 0.5;
  top(n_qubits, n_qubits) = 0.5;
  return e;
}

double trace_norm(const Matrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().sum();
}

double block_trace_distance(const SpinEnsemble& a, const SpinEnsemble& b, int sector) {
  if (a.layout != b.layout) throw std::invalid_argument("trace_distance: layout mismatch");
  const Matrix diff = a.blocks.at(sector) - b.blocks.at(sector);
  return 0.5 * trace_norm((diff + diff.adjoint()) * 0.5);
}

double trace_distance(const SpinEnsemble& a, const SpinEnsemble& b) {
  if (a.layout != b.layout) throw std::invalid_argument("trace_distance: layout mismatch");
  double d = 0.0;
  for (int s = 0; s < a.layout.num_sectors(); ++s) d += block_trace_distance(a, b, s);
  return d;
}

double hermiticity_defect(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace pitomo
