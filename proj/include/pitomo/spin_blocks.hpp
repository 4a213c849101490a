#pragma once

// Compressed representation of permutationally invariant N-qubit states.
//
// The N-qubit space splits into spin sectors H_j (x) K_j. A permutationally
// invariant operator acts as A_j (x) 1 on every sector, so only the
// (2j+1)x(2j+1) blocks A_j need to be stored. Spin labels are always carried as
// two_j = 2j, which keeps half-integer spins exact.
//
// Block layout convention: rows/columns of a spin-j block are ordered by the
// magnetic quantum number m = j, j-1, ..., -j. The computational state |0> is
// the spin-up state, so |0...0> sits at index 0 of the j = N/2 block.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace pitomo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Vector3 = Eigen::Vector3d;

inline constexpr int kDefaultMaxQubits = 30;
// Upper bound for any configured cap: binomials C(N, N/2) and 2^N stay exact in
// 64 bits with 128-bit intermediates.
inline constexpr int kHardMaxQubits = 60;

/// The qubit cap: PITOMO_MAX_QUBITS when it holds an integer in [1, 60],
/// otherwise kDefaultMaxQubits.
int configured_max_qubits();

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;

/// Exact binomial coefficient; throws std::overflow_error if it does not fit
/// in 64 bits. Returns 0 for k < 0 or k > n.
std::uint64_t binomial(int n, int k);

/// Spin sectors of N qubits with their block dimensions and multiplicities.
class SpinSectorLayout {
 public:
  /// Throws std::invalid_argument for n_qubits < 1 or above max_qubits.
  explicit SpinSectorLayout(int n_qubits, int max_qubits = configured_max_qubits());

  int n_qubits() const { return n_qubits_; }
  int num_sectors() const { return static_cast<int>(two_js_.size()); }
  /// Sectors are indexed in ascending spin, so the symmetric sector is last.
  int top_sector() const { return num_sectors() - 1; }
  int two_j(int sector) const { return two_js_.at(sector); }
  int block_dim(int sector) const { return two_js_.at(sector) + 1; }
  std::uint64_t multiplicity(int sector) const { return multiplicities_.at(sector); }
  const std::vector<int>& two_js() const { return two_js_; }

  /// Sector index of a spin label; throws std::out_of_range for an absent label.
  int sector_of(int two_j) const;
  bool has_two_j(int two_j) const;

  /// Sum of block dimensions, i.e. the side length of the compressed
  /// block-diagonal matrix.
  int compressed_dim() const { return compressed_dim_; }

  /// Index of magnetic number m = two_m / 2 inside block `sector`, or -1 when
  /// |m| > j.
  int index_of_m(int sector, int two_m) const;

  bool operator==(const SpinSectorLayout& other) const { return n_qubits_ == other.n_qubits_; }
  bool operator!=(const SpinSectorLayout& other) const { return !(*this == other); }

 private:
  int n_qubits_;
  int compressed_dim_ = 0;
  std::vector<int> two_js_;
  std::vector<std::uint64_t> multiplicities_;
};

/// Weighted spin blocks p_j rho_j of a permutationally invariant state.
///
/// `blocks[s]` is the Hermitian matrix for sector s of `layout`. The full state
/// is the direct sum over sectors of blocks[s] (x) 1/dim(K_j).
struct SpinEnsemble {
  SpinSectorLayout layout;
  std::vector<Matrix> blocks;

  explicit SpinEnsemble(const SpinSectorLayout& l);

  /// All blocks zero.
  static SpinEnsemble zeros(const SpinSectorLayout& l);
  /// Compressed form of 1/2^N: p_j = (2j+1) dim(K_j) / 2^N, rho_j uniform.
  static SpinEnsemble maximally_mixed(const SpinSectorLayout& l);

  int n_qubits() const { return layout.n_qubits(); }
  /// p_j, the trace of block `sector`.
  double weight(int sector) const;
  double total_trace() const;

  /// Throws std::domain_error describing the first violated state invariant
  /// (Hermiticity, positivity, unit trace).
  void validate(double herm_tol = kHermitianTol, double psd_tol = kPsdTol,
                double trace_tol = kTraceTol) const;
  bool is_valid() const;
};

struct SpinOperators {
  int two_j = 0;
  Matrix s_x, s_y, s_z;
  Matrix j_minus;
  Matrix j_plus;
};

/// Standard angular-momentum matrices (hbar = 1) in the |j,m> basis.
SpinOperators spin_operators(int two_j);

/// exp(-i * scale * generator) for a Hermitian generator, by eigendecomposition.
/// Throws std::invalid_argument if the generator is not Hermitian within 1e-10.
Matrix hermitian_expm(const Matrix& generator, double scale);

/// Dicke state with k excitations (|1> count); lives at m = N/2 - k.
SpinEnsemble dicke_ensemble(int n_qubits, int k_excitations);
/// (|0...0> + |1...1>)/sqrt(2).
SpinEnsemble ghz_ensemble(int n_qubits);

/// Sum of singular values of a Hermitian matrix.
double trace_norm(const Matrix& hermitian);

/// Trace distance between two PI states.
///
/// The full operators are block diagonal with blocks a_j (x) 1/dim(K_j), which
/// appear dim(K_j) times each. The trace norm of the difference in sector j is
/// dim(K_j) * ||a_j - b_j||_1 / dim(K_j), so the multiplicities cancel and the
/// distance is (1/2) sum_j ||a_j - b_j||_1 on the compressed blocks.
double trace_distance(const SpinEnsemble& a, const SpinEnsemble& b);

/// (1/2) ||a_j - b_j||_1 for a single sector.
double block_trace_distance(const SpinEnsemble& a, const SpinEnsemble& b, int sector);

// Checks shared by several modules.
double hermiticity_defect(const Matrix& m);
double min_eigenvalue(const Matrix& hermitian);
double max_eigenvalue(const Matrix& hermitian);

}  // namespace pitomo
