#pragma once

// Random PI states and simulated count data.

#include <cstdint>
#include <random>
#include <vector>

#include "pitomo/dataset.hpp"
#include "pitomo/spin_blocks.hpp"

namespace pitomo {

/// Seeded generator with samplers written out explicitly, so sequences agree
/// across standard libraries (the std distributions are implementation
/// defined; the mt19937_64 engine is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  /// Gamma(shape, 1), Marsaglia-Tsang.
  double gamma(double shape);
  /// Uniform on the unit sphere.
  Vector3 unit_vector();
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class PurityMode { HaarPure, HilbertSchmidtMixed };

/// p_j ~ Dirichlet(alpha) across sectors, rho_j Haar-pure or Hilbert-Schmidt
/// mixed per sector.
SpinEnsemble random_pi_state(const SpinSectorLayout& layout, PurityMode mode, Rng& rng,
                             double dirichlet_alpha = 0.5);
SpinEnsemble random_pi_state(const SpinSectorLayout& layout, PurityMode mode, std::uint64_t seed,
                             double dirichlet_alpha = 0.5);

/// `count` independent uniformly random settings.
std::vector<Setting> random_settings(int count, Rng& rng);

/// (N+2 choose 2), the number of settings of a determined design.
int determined_setting_count(int n_qubits);

inline constexpr std::int64_t kNominalRepetitions = 1000;

/// Frequencies equal to the exact probabilities; counts are p * repetitions.
Dataset exact_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                      std::int64_t nominal_repetitions = kNominalRepetitions);

/// One multinomial draw of size `repetitions` per setting.
Dataset sample_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                       std::int64_t repetitions, Rng& rng);
Dataset sample_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                       std::int64_t repetitions, std::uint64_t seed);

/// Multinomial counts over `probs` (renormalized) for `trials` draws.
RealVector sample_counts(const RealVector& probs, std::int64_t trials, Rng& rng);

struct DickeMixtureParams {
  double p_asym = 0.6;
  double theta = 0.2;
  double noise_weight = 0.4;
};

/// Binomial mixture of Dicke states, rotated collectively by exp(-i theta S_y)
/// and mixed with a Hilbert-Schmidt random PI state of weight noise_weight.
SpinEnsemble dicke_mixture_state(int n_qubits, const DickeMixtureParams& params, std::uint64_t seed);

}  // namespace pitomo
