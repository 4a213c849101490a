#include "pitomo/full_space.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>

namespace pitomo::full {
namespace {

void check_oracle_size(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxOracleQubits) {
    throw std::invalid_argument("full-space oracle supports 1.." + std::to_string(kMaxOracleQubits) +
                                " qubits, got " + std::to_string(n_qubits));
  }
}

// Bit of qubit n (qubit 0 = most significant) in basis index idx.
inline int qubit_bit(std::size_t idx, int n, int n_qubits) {
  return static_cast<int>((idx >> (n_qubits - 1 - n)) & 1u);
}

Eigen::VectorXcd permute_vector(const Eigen::VectorXcd& v, const std::vector<int>& perm,
                                int n_qubits) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    if (v(idx) == Complex(0.0)) continue;
    std::size_t target = 0;
    for (int n = 0; n < n_qubits; ++n) {
      if (qubit_bit(static_cast<std::size_t>(idx), n, n_qubits)) {
        target |= std::size_t{1} << (n_qubits - 1 - perm[n]);
      }
    }
    out(static_cast<Eigen::Index>(target)) += v(idx);
  }
  return out;
}

Eigen::VectorXcd apply_j_minus(const Eigen::VectorXcd& v, int n_qubits) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    if (v(idx) == Complex(0.0)) continue;
    for (int n = 0; n < n_qubits; ++n) {
      const std::size_t mask = std::size_t{1} << (n_qubits - 1 - n);
      // sigma_- = |1><0| maps spin-up |0> to |1>.
      if ((static_cast<std::size_t>(idx) & mask) == 0) {
        out(static_cast<Eigen::Index>(static_cast<std::size_t>(idx) | mask)) += v(idx);
      }
    }
  }
  return out;
}

Eigen::VectorXcd highest_weight_seed(int n_qubits, int two_j) {
  // |0>^(2j) on the first qubits, singlets on consecutive pairs after that.
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  const int pairs = (n_qubits - two_j) / 2;
  const double amp = std::pow(2.0, -pairs / 2.0);
  for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << pairs); ++choice) {
    std::size_t idx = 0;
    int sign = 1;
    for (int p = 0; p < pairs; ++p) {
      const int first = two_j + 2 * p;
      // singlet (|01> - |10>)/sqrt(2): choice bit 0 -> |01>, bit 1 -> -|10>
      const bool flip = (choice >> p) & 1u;
      const int set_qubit = flip ? first : first + 1;
      idx |= std::size_t{1} << (n_qubits - 1 - set_qubit);
      if (flip) sign = -sign;
    }
    v(static_cast<Eigen::Index>(idx)) = amp * sign;
  }
  return v;
}

}  // namespace

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix acc = Matrix::Identity(1, 1);
  for (const auto& f : factors) {
    Matrix next(acc.rows() * f.rows(), acc.cols() * f.cols());
    for (Eigen::Index r = 0; r < acc.rows(); ++r) {
      for (Eigen::Index c = 0; c < acc.cols(); ++c) {
        next.block(r * f.rows(), c * f.cols(), f.rows(), f.cols()) = acc(r, c) * f;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

Matrix spin_basis(const SpinSectorLayout& layout, int sector) {
  const int n = layout.n_qubits();
  check_oracle_size(n);
  const int two_j = layout.two_j(sector);
  const int dim = two_j + 1;
  const auto mult = static_cast<Eigen::Index>(layout.multiplicity(sector));
  const Eigen::Index full_dim = Eigen::Index{1} << n;

  const Eigen::VectorXcd seed = highest_weight_seed(n, two_j);
  std::vector<Eigen::VectorXcd> highest;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(0x5eed + static_cast<unsigned>(two_j));
  const long max_attempts = 1000 + 200 * static_cast<long>(mult);
  for (long attempt = 0; attempt < max_attempts && static_cast<Eigen::Index>(highest.size()) < mult;
       ++attempt) {
    if (attempt > 0) {
      for (int i = n - 1; i > 0; --i) {
        const int k = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[i], perm[k]);
      }
    }
    Eigen::VectorXcd cand = permute_vector(seed, perm, n);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& h : highest) cand -= h * h.dot(cand);
    }
    const double norm = cand.norm();
    if (norm < 1e-8) continue;
    highest.push_back(cand / norm);
  }
  if (static_cast<Eigen::Index>(highest.size()) != mult) {
    throw std::runtime_error("spin_basis: failed to span the multiplicity space");
  }

  Matrix basis(full_dim, mult * dim);
  for (Eigen::Index alpha = 0; alpha < mult; ++alpha) {
    Eigen::VectorXcd v = highest[alpha];
    for (int i = 0; i < dim; ++i) {
      if (i > 0) {
        v = apply_j_minus(v, n);
        v /= v.norm();
      }
      basis.col(alpha * dim + i) = v;
    }
  }
  return basis;
}

Matrix expand_full(const SpinEnsemble& e) {
  const auto& layout = e.layout;
  check_oracle_size(layout.n_qubits());
  const Eigen::Index full_dim = Eigen::Index{1} << layout.n_qubits();
  Matrix rho = Matrix::Zero(full_dim, full_dim);
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const Matrix basis = spin_basis(layout, s);
    const int dim = layout.block_dim(s);
    const auto mult = static_cast<Eigen::Index>(layout.multiplicity(s));
    const Matrix block = e.blocks[s] / static_cast<double>(mult);
    for (Eigen::Index alpha = 0; alpha < mult; ++alpha) {
      const auto cols = basis.middleCols(alpha * dim, dim);
      rho += cols * block * cols.adjoint();
    }
  }
  return rho;
}

SpinEnsemble compress_full(const SpinSectorLayout& layout, const Matrix& rho) {
  check_oracle_size(layout.n_qubits());
  SpinEnsemble e(layout);
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const Matrix basis = spin_basis(layout, s);
    const int dim = layout.block_dim(s);
    const auto mult = static_cast<Eigen::Index>(layout.multiplicity(s));
    for (Eigen::Index alpha = 0; alpha < mult; ++alpha) {
      const auto cols = basis.middleCols(alpha * dim, dim);
      e.blocks[s] += cols.adjoint() * rho * cols;
    }
  }
  return e;
}

std::vector<Matrix> coarse_grained_povm(int n_qubits, const Vector3& axis) {
  check_oracle_size(n_qubits);
  const Matrix a_sigma = axis.x() * pauli_x() + axis.y() * pauli_y() + axis.z() * pauli_z();
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix plus = (id + a_sigma) * 0.5;
  const Matrix minus = (id - a_sigma) * 0.5;
  // outcomes[k] after q qubits: sum over placements with k plus-projectors.
  std::vector<Matrix> outcomes{Matrix::Identity(1, 1)};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<Matrix> next(outcomes.size() + 1);
    const Eigen::Index d = outcomes[0].rows() * 2;
    for (auto& m : next) m = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      next[k] += kron_all({outcomes[k], minus});
      next[k + 1] += kron_all({outcomes[k], plus});
    }
    outcomes = std::move(next);
  }
  return outcomes;
}

Matrix permutation_operator(int n_qubits, const std::vector<int>& perm) {
  check_oracle_size(n_qubits);
  const Eigen::Index full_dim = Eigen::Index{1} << n_qubits;
  Matrix v = Matrix::Zero(full_dim, full_dim);
  for (Eigen::Index idx = 0; idx < full_dim; ++idx) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(full_dim);
    e(idx) = 1.0;
    v.col(idx) = permute_vector(e, perm, n_qubits);
  }
  return v;
}

Matrix collective_unitary(int n_qubits, const Matrix& single) {
  check_oracle_size(n_qubits);
  return kron_all(std::vector<Matrix>(static_cast<std::size_t>(n_qubits), single));
}

Matrix symmetric_projector(int n_qubits) {
  SpinSectorLayout layout(n_qubits);
  const Matrix basis = spin_basis(layout, layout.top_sector());
  return basis * basis.adjoint();
}

Matrix axis_power_operator(int n_qubits, const Vector3& axis, int weight) {
  check_oracle_size(n_qubits);
  if (weight < 0 || weight > n_qubits) throw std::invalid_argument("weight out of range");
  const Matrix a_sigma = axis.x() * pauli_x() + axis.y() * pauli_y() + axis.z() * pauli_z();
  std::vector<Matrix> factors;
  for (int q = 0; q < n_qubits; ++q) factors.push_back(q < weight ? a_sigma : Matrix::Identity(2, 2));
  return kron_all(factors);
}

}  // namespace pitomo::full
