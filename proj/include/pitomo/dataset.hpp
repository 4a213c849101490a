#pragma once

#include <cstdint>
#include <vector>

#include "pitomo/povm.hpp"

namespace pitomo {

/// Outcome counts of one measurement setting.
///
/// For exact datasets the counts are real numbers p_k * repetitions and the
/// repetition number only sets the scale.
struct Record {
  Setting setting;
  RealVector counts;  // n_0 .. n_N
  std::int64_t repetitions = 0;

  RealVector frequencies() const { return counts / static_cast<double>(repetitions); }
};

struct Dataset {
  int n_qubits = 0;
  std::vector<Record> records;
  bool exact = false;

  std::vector<Setting> settings() const;
  /// Frequencies of all records stacked as [record * (N+1) + k].
  RealVector stacked_frequencies() const;
  /// Throws std::invalid_argument on shape errors, negative counts, or counts
  /// that do not add up to the repetition number (exactly for sampled data,
  /// within 1e-9 relative for exact data).
  void validate() const;
};

}  // namespace pitomo
