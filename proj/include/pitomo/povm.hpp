#pragma once

// Coarse-grained local measurements in the spin-block representation.
//
// Setting a: every qubit is measured in the eigenbasis of a.sigma. Outcome k
// collects all results with exactly k "+1" (|0>_a) answers. In sector j the
// standard-basis element M^{e3}_{k,j} is the projector onto m = k - N/2,
// present only when |k - N/2| <= j. Rotated settings conjugate these with the
// spin-j representation of the single-qubit rotation taking e3 to a.

#include <vector>

#include "pitomo/spin_blocks.hpp"

namespace pitomo {

inline constexpr double kAxisNormTol = 1e-12;

struct Setting {
  Vector3 axis = Vector3::UnitZ();

  Setting() = default;
  /// Throws std::invalid_argument unless |axis| = 1 within 1e-12.
  explicit Setting(const Vector3& unit_axis);
  /// Rescales any non-zero vector onto the unit sphere.
  static Setting normalized(const Vector3& v);
};

/// e1, e2, e3.
std::vector<Setting> standard_settings();

struct RotationParams {
  double theta = 0.0;   ///< radians
  Vector3 axis = Vector3::UnitX();
};

/// Rotation about n = (e3 x a)/|e3 x a| by theta = arccos(e3 . a) maps e3 onto
/// a. For a = +-e3 the axis is e1.
RotationParams rotation_params(const Setting& setting);

class MeasurementBlockSet {
 public:
  MeasurementBlockSet(Setting setting, SpinSectorLayout layout,
                      std::vector<std::vector<Matrix>> blocks);

  const Setting& setting() const { return setting_; }
  const SpinSectorLayout& layout() const { return layout_; }
  int n_qubits() const { return layout_.n_qubits(); }
  int num_outcomes() const { return layout_.n_qubits() + 1; }

  /// False for structurally zero blocks (|k - N/2| > j).
  bool present(int k, int sector) const;
  /// Throws std::out_of_range for structurally zero blocks.
  const Matrix& block(int k, int sector) const;

 private:
  Setting setting_;
  SpinSectorLayout layout_;
  std::vector<std::vector<Matrix>> blocks_;  // [k][sector], 0x0 when absent
};

MeasurementBlockSet standard_blocks(int n_qubits);
MeasurementBlockSet rotated_blocks(int n_qubits, const Setting& setting);
std::vector<MeasurementBlockSet> rotated_blocks(int n_qubits, const std::vector<Setting>& settings);

/// p_k = sum_j tr(rho_j M_{k,j}); values in [-1e-10, 0) are clamped to zero,
/// anything more negative throws std::domain_error.
RealVector probabilities(const SpinEnsemble& state, const MeasurementBlockSet& blocks);

/// K(k, w, N) for k = 0..N: the expectation of the symmetrized w-fold product
/// of a.sigma is sum_k K(k, w, N) p_k.
///
/// An outcome with k "+1" spins and N-k "-1" spins gives each w-subset the
/// sign (-1)^l when l of its members are "-1", hence
/// K = sum_l (-1)^l C(N-k, l) C(k, w-l) / C(N, w).
RealVector moment_coefficients(int n_qubits, int weight);

}  // namespace pitomo
