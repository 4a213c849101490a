#pragma once

// Statistical reconstruction of permutationally invariant states.
//
// States are parametrized affinely as rho(x) = rho_mm + sum_i x_i B_i over the
// block-diagonal Hermitian unit-trace matrices, starting at the compressed
// totally mixed state rho_mm. Each fit function F is minimized together with
// the barrier -t log det rho(x) for t = t0, t0/10, ... down to t_min; at the
// barrier optimum F exceeds the constrained optimum by at most
// t * compressed_dim.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pitomo/dataset.hpp"
#include "pitomo/newton.hpp"
#include "pitomo/povm.hpp"
#include "pitomo/spin_blocks.hpp"

namespace pitomo {

enum class FitPrinciple { MaxLik, LeastSquares, FreeLeastSquares, HedgedMaxLik };

std::string to_string(FitPrinciple p);
/// Accepts "ml", "ls", "freels", "hedged" (and the enum names).
FitPrinciple parse_principle(const std::string& name);

struct FitSpec {
  FitPrinciple principle = FitPrinciple::MaxLik;
  /// Least-squares weights, stacked like Dataset::stacked_frequencies().
  /// Empty means w = 1 / max(f, 1 / (weight_floor_scale * N_R)).
  RealVector ls_weights;
  double weight_floor_scale = 10.0;
  double beta = 0.0;  // hedging strength

  static FitSpec max_lik() { return {}; }
  static FitSpec least_squares(RealVector weights = {});
  static FitSpec free_least_squares();
  static FitSpec hedged(double beta);

  void validate() const;
};

/// Default least-squares weights for a dataset.
RealVector default_ls_weights(const Dataset& data, double floor_scale = 10.0);

/// Fit function of a principle over stacked frequencies and
/// probabilities. For HedgedMaxLik only the likelihood part is returned; the
/// -beta log det term needs the state and is added by the solver.
/// Zero-frequency terms drop out of likelihood sums. Throws NonInteriorError
/// when a term that needs p > 0 sees p <= 0.
double fit_value(const FitSpec& spec, const RealVector& frequencies, const RealVector& probs);

/// Orthonormal traceless basis of block-diagonal Hermitian matrices.
///
/// Per sector: generalized Gell-Mann matrices (symmetric, antisymmetric,
/// diagonal). Across sectors: num_sectors - 1 directions sum_s c_s 1_s/sqrt(d_s)
/// with c orthogonal to (sqrt(d_s))_s. All elements satisfy tr(B_i B_l) = delta_il.
class Parametrization {
 public:
  explicit Parametrization(const SpinSectorLayout& layout);

  const SpinSectorLayout& layout() const { return layout_; }
  int dimension() const { return static_cast<int>(elements_.size()); }
  const SpinEnsemble& base_point() const { return base_; }

  /// base_point + sum x_i B_i (not validated).
  SpinEnsemble state(const RealVector& x) const;
  /// sum d_i B_i as blocks.
  std::vector<Matrix> direction(const RealVector& d) const;
  /// Blocks of a single basis element.
  std::vector<Matrix> element(int i) const;
  /// c_i = Re tr(B_i H) for block-diagonal H.
  RealVector coordinates(const std::vector<Matrix>& blocks) const;
  /// x with state(x) == e, for a unit-trace ensemble e.
  RealVector coordinates_of(const SpinEnsemble& e) const;
  /// H_il = Re tr(X B_i X B_l) for block-diagonal Hermitian X.
  RealMatrix congruence_hessian(const std::vector<Matrix>& x_blocks) const;

 private:
  struct Entry {
    int row;
    int col;
    Complex value;
  };
  struct Element {
    // (sector, entries in that sector)
    std::vector<std::pair<int, std::vector<Entry>>> parts;
  };

  SpinSectorLayout layout_;
  SpinEnsemble base_;
  std::vector<Element> elements_;
  std::vector<std::vector<int>> touching_;  // sector -> element indices
};

struct SolverConfig {
  double t0 = 1.0;
  double t_reduce = 10.0;
  double t_min = 1e-10;
  /// A stage also ends once half the squared Newton decrement drops to
  /// 1e-20: near a boundary optimum at small t rounding keeps the gradient
  /// norm near eps / t even after the iterate has stopped moving.
  NewtonConfig newton{.decrement_tol = 1e-20};
  bool abort_on_stage_failure = false;

  void validate() const;
};

/// One dataset together with a fit principle, with everything the solver
/// needs precomputed: measurement blocks, the overlap table
/// G[(a,k), i] = tr(B_i M_k^a) and the base probabilities.
class ReconstructionProblem {
 public:
  ReconstructionProblem(const Dataset& data, FitSpec spec);

  const Parametrization& parametrization() const { return param_; }
  const FitSpec& spec() const { return spec_; }
  const Dataset& dataset() const { return data_; }
  const std::vector<MeasurementBlockSet>& measurement_blocks() const { return blocks_; }
  const RealMatrix& overlaps() const { return overlaps_; }
  const RealVector& frequencies() const { return freqs_; }
  int dimension() const { return param_.dimension(); }

  /// Stacked probabilities p_k^a(rho(x)), affine in x.
  RealVector probabilities(const RealVector& x) const;
  double fit_value(const RealVector& x) const;
  /// Gradient and Hessian of the fit term alone.
  std::pair<RealVector, RealMatrix> fit_gradient_hessian(const RealVector& x) const;
  RealVector fit_gradient(const RealVector& x) const;

  struct BarrierTerms {
    double value = 0.0;
    RealVector gradient;
    RealMatrix hessian;
  };
  /// -t log det rho(x) with derivatives; throws NonInteriorError unless
  /// every block of rho(x) is positive definite.
  BarrierTerms barrier(const RealVector& x, double t, bool with_hessian = true) const;

  /// The stage objective F + barrier(t).
  std::unique_ptr<BarrierObjective> objective(double t) const;

 private:
  Dataset data_;
  FitSpec spec_;
  Parametrization param_;
  std::vector<MeasurementBlockSet> blocks_;
  RealMatrix overlaps_;
  RealVector base_probs_;
  RealVector freqs_;
  RealVector weights_;
  RealMatrix ls_hessian_;  // constant for least squares
  friend class FitBarrierObjective;
};

/// fit_gradient_hessian for a standalone point; convenience over
/// ReconstructionProblem.
std::pair<RealVector, RealMatrix> fit_gradient_hessian(const ReconstructionProblem& problem,
                                                       const RealVector& x);

struct StageRecord {
  double t = 0.0;
  int iterations = 0;
  double fit_value = 0.0;
  double objective_value = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string message;
  RealVector x;
};

struct ReconstructionResult {
  SpinEnsemble estimate;
  RealVector x;
  double fit_value = 0.0;
  double gap_bound = 0.0;
  double final_t = 0.0;
  int total_iterations = 0;
  bool converged = false;
  std::vector<StageRecord> trace;

  explicit ReconstructionResult(const SpinSectorLayout& layout) : estimate(layout) {}
};

/// Called after every accepted Newton step with the stage penalty and the new
/// iterate.
using ReconstructionCallback = std::function<void(double t, int total_iteration, const RealVector& x)>;

/// Runs the outer barrier loop. For HedgedMaxLik the loop ends at t = beta and
/// the reported fit value includes -beta log det rho.
ReconstructionResult reconstruct(const ReconstructionProblem& problem, const SolverConfig& config,
                                 const ReconstructionCallback& callback = {});
ReconstructionResult reconstruct(const Dataset& data, const FitSpec& spec,
                                 const SolverConfig& config = {},
                                 const ReconstructionCallback& callback = {});

struct KktReport {
  double max_residual = 0.0;      // max_i |dF/dx_i - tr(Lambda B_i)|
  double grad_inf_norm = 0.0;     // ||grad F||_inf
  double duality_gap = 0.0;       // tr(Lambda rho)
  double min_multiplier_eig = 0.0;
};

/// Optimality certificate with Lambda = t rho(x)^-1.
KktReport kkt_certificate(const ReconstructionProblem& problem, const RealVector& x, double t);

struct FixedPointResult {
  SpinEnsemble estimate;
  std::vector<double> fit_trace;  // likelihood fit after each iteration, index 0 = start

  explicit FixedPointResult(const SpinSectorLayout& layout) : estimate(layout) {}
};

/// Multiplicative iteration rho_j <- R_j rho_j R_j^dag / norm with
/// R_j = sum_{a,k} f_k^a / p_k^a M_{k,j}^a.
/// Throws std::domain_error for degenerate data (zero normalization, or an
/// observed outcome with zero probability).
FixedPointResult fixed_point_reconstruct(const Dataset& data, int iterations,
                                         const SpinEnsemble* start = nullptr);

}  // namespace pitomo
