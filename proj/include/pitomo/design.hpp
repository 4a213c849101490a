#pragma once

// Choice of measurement directions by minimizing the propagated error of the
// generalized Bloch vector b_klmn = tr(rho [sx^k sy^l sz^m 1^n]_PI).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pitomo/povm.hpp"
#include "pitomo/spin_blocks.hpp"

namespace pitomo {

struct BlochIndex {
  int k = 0;  // sigma_x factors
  int l = 0;  // sigma_y factors
  int m = 0;  // sigma_z factors
  int n = 0;  // identities
  int weight() const { return k + l + m; }
  bool operator==(const BlochIndex&) const = default;
};

/// All (k, l, m, n) with k + l + m + n = N, ordered by weight, then k, then l.
std::vector<BlochIndex> bloch_indices(int n_qubits);

/// N! / (k! l! m! n!) as a double.
double multinomial(const BlochIndex& idx);

struct DesignProblem {
  int n_qubits = 0;
  SpinEnsemble target;
  double noise_constant = 1.0;

  DesignProblem(int n, SpinEnsemble tar, double noise = 1.0);
  void validate() const;
};

/// Thrown when the settings cannot resolve every Bloch element of some weight.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(int weight, int rank, int required, double residual);
  int weight() const { return weight_; }
  int rank() const { return rank_; }
  int required() const { return required_; }
  double residual() const { return residual_; }

 private:
  int weight_;
  int rank_;
  int required_;
  double residual_;
};

/// Rows = settings, columns = monomials (k', l', m') of weight w in the order
/// of bloch_indices; entries multinom(w; k', l', m') ax^k' ay^l' az^m'.
RealMatrix bloch_design_matrix(const std::vector<Setting>& settings, int weight);

struct WeightSolution {
  int weight = 0;
  int rank = 0;
  int required_rank = 0;
  RealMatrix coefficients;  // settings x monomials, min-norm solution of G^T C = 1
  double residual = 0.0;    // ||G^T C - 1||_max
  bool full_rank() const { return rank == required_rank; }
};

/// Minimum-norm coefficients for every monomial of one weight.
WeightSolution solve_weight(const std::vector<Setting>& settings, int weight);

/// Coefficients c_i with b = sum_i c_i <[(a_i.sigma)^w (x) 1]_PI>.
/// Throws RankDeficientError when the element is not resolvable.
RealVector bloch_coefficients(const std::vector<Setting>& settings, const BlochIndex& idx);

/// Expectations of the symmetrized weight-w power per setting, and their
/// variances, on the target state.
struct SettingMoments {
  RealVector mean;
  RealVector variance;
};
SettingMoments setting_moments(const SpinEnsemble& target, const std::vector<Setting>& settings,
                               int weight);

/// K * sum_i c_i^2 Delta_i.
double element_error(const DesignProblem& problem, const std::vector<Setting>& settings,
                     const BlochIndex& idx);

/// sum over all indices of multinom(N; k, l, m, n) times the element error.
/// Throws RankDeficientError for an unresolvable design.
double total_error(const DesignProblem& problem, const std::vector<Setting>& settings);

/// Throws std::invalid_argument if two settings coincide up to sign within
/// `tol` (Euclidean).
void check_distinct_settings(const std::vector<Setting>& settings, double tol = 1e-6);

struct DesignOptions {
  double p_mix = 0.9;
  int max_stall = 500;
  std::int64_t max_proposals = 1000000;
  void validate() const;
};

struct DesignTracePoint {
  std::int64_t proposal = 0;
  double total_error = 0.0;
};

struct DesignResult {
  std::vector<Setting> settings;
  double total_error = 0.0;
  std::vector<DesignTracePoint> trace;  // start plus every accepted proposal
  std::int64_t proposals = 0;
};

/// Random walk a_i' = normalize(p a_i + (1 - p) r_i) on all directions at once,
/// accepted only when the total error strictly decreases.
DesignResult optimize_settings(const DesignProblem& problem, std::vector<Setting> initial,
                               std::uint64_t seed, const DesignOptions& options = {});
/// Same, starting from `count` random directions drawn from the seed.
DesignResult optimize_settings(const DesignProblem& problem, int count, std::uint64_t seed,
                               const DesignOptions& options = {});

}  // namespace pitomo
