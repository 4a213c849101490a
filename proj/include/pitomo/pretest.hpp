#pragma once

// Fidelity pretest: an operator Z = sum_{a,k} z_k^a M_k^a built from a few
// settings with Z <= P_sym gives F_PI >= tr(rho Z)^2 for tr(rho Z) >= 0.

#include <cstdint>
#include <string>
#include <vector>

#include "pitomo/dataset.hpp"
#include "pitomo/reconstruct.hpp"

namespace pitomo {

struct PretestWitness {
  int n_qubits = 0;
  std::vector<Setting> settings;
  std::vector<RealVector> z;  // z[a](k)

  double z_max(int a) const { return z.at(a).maxCoeff(); }
  double z_min(int a) const { return z.at(a).minCoeff(); }
  /// sum_a (z_max^a - z_min^a)^2
  double c_z_squared() const;
  void validate() const;
};

struct PretestOptions {
  /// The objective is tr(rho Z) - (regularization / 2) |z|^2. The optimal
  /// witness is rarely unique; the quadratic term selects the smallest one and
  /// keeps the Newton systems well conditioned along the optimal face.
  double regularization = 1e-4;
  SolverConfig solver{};
};

struct PretestResult {
  PretestWitness witness;
  double objective = 0.0;  // tr(rho_target Z)
  bool converged = false;
  int iterations = 0;
  std::string message;
};

/// Maximizes the (regularized) tr(rho_target Z) subject to Z_{N/2} <= 1 and Z_j <= 0 (j < N/2),
/// starting from the strictly feasible z = -1.
PretestResult optimize_witness(const SpinEnsemble& target, const std::vector<Setting>& settings,
                               const PretestOptions& options = {});

/// Z restricted to every sector, ascending spin.
std::vector<Matrix> witness_blocks(const PretestWitness& w);

/// Largest eigenvalue of Z_{N/2} - 1 and of each Z_j, j < N/2; feasible
/// witnesses have max_violation <= 0.
struct Feasibility {
  double max_violation = 0.0;
  std::vector<double> per_sector;
};
Feasibility witness_feasibility(const PretestWitness& w);

/// tr(rho Z).
double witness_expectation(const PretestWitness& w, const SpinEnsemble& state);
/// sum z_k^a f_k^a; records must follow the witness settings.
double witness_expectation(const PretestWitness& w, const Dataset& data);

/// <Z>^2 when <Z> >= 0, else 0.
double fidelity_bound(double expectation);
double fidelity_bound(const PretestWitness& w, const SpinEnsemble& state);
double fidelity_bound(const PretestWitness& w, const Dataset& data);

struct StatisticalBound {
  double mean = 0.0;        // Z-bar
  double bound = 0.0;       // sign(Z-bar - eps) (Z-bar - eps)^2, at least -1
  double confidence = 0.0;  // 1 - exp(-2 N_R eps^2 / C_z^2)
};

/// Hoeffding-type finite-statistics bound from sampled counts. All records
/// must share one repetition number.
StatisticalBound statistical_bound(const PretestWitness& w, const Dataset& data, double epsilon);

/// epsilon giving the requested confidence for N_R repetitions.
double epsilon_for_confidence(const PretestWitness& w, std::int64_t repetitions, double confidence);

}  // namespace pitomo
