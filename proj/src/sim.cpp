#include "pitomo/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pitomo {

// ---------------------------------------------------------------------------
// Dataset

std::vector<Setting> Dataset::settings() const {
  std::vector<Setting> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.setting);
  return out;
}

RealVector Dataset::stacked_frequencies() const {
  const int outcomes = n_qubits + 1;
  RealVector f(static_cast<Eigen::Index>(records.size()) * outcomes);
  for (std::size_t a = 0; a < records.size(); ++a) {
    f.segment(static_cast<Eigen::Index>(a) * outcomes, outcomes) = records[a].frequencies();
  }
  return f;
}

void Dataset::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("dataset: n_qubits must be positive");
  for (std::size_t a = 0; a < records.size(); ++a) {
    const auto& r = records[a];
    const std::string where = "dataset record " + std::to_string(a) + ": ";
    if (r.counts.size() != n_qubits + 1) {
      throw std::invalid_argument(where + "expected " + std::to_string(n_qubits + 1) + " counts");
    }
    if (r.repetitions < 1) throw std::invalid_argument(where + "repetitions must be positive");
    if (!r.counts.allFinite() || (r.counts.array() < 0.0).any()) {
      throw std::invalid_argument(where + "counts must be finite and non-negative");
    }
    const double total = r.counts.sum();
    const double reps = static_cast<double>(r.repetitions);
    if (exact) {
      if (std::abs(total - reps) > 1e-9 * reps) {
        throw std::invalid_argument(where + "counts do not add up to the repetition number");
      }
    } else {
      for (Eigen::Index k = 0; k < r.counts.size(); ++k) {
        if (r.counts(k) != std::floor(r.counts(k))) {
          throw std::invalid_argument(where + "sampled counts must be integers");
        }
      }
      if (total != reps) throw std::invalid_argument(where + "counts do not add up to the repetition number");
    }
  }
}

// ---------------------------------------------------------------------------
// Rng

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Vector3 Rng::unit_vector() {
  for (;;) {
    Vector3 v(normal(), normal(), normal());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

// ---------------------------------------------------------------------------
// States

SpinEnsemble random_pi_state(const SpinSectorLayout& layout, PurityMode mode, Rng& rng,
                             double dirichlet_alpha) {
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("Dirichlet concentration must be positive");
  const int sectors = layout.num_sectors();
  RealVector weights(sectors);
  for (int s = 0; s < sectors; ++s) weights(s) = rng.gamma(dirichlet_alpha);
  const double total = weights.sum();
  if (!(total > 0.0)) {
    weights.setZero();
    weights(layout.top_sector()) = 1.0;
  } else {
    weights /= total;
  }

  SpinEnsemble e(layout);
  for (int s = 0; s < sectors; ++s) {
    const int n = layout.block_dim(s);
    Matrix rho;
    if (mode == PurityMode::HaarPure) {
      Eigen::VectorXcd v(n);
      for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
      v /= v.norm();
      rho = v * v.adjoint();
    } else {
      Matrix g(n, n);
      for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) g(r, c) = rng.complex_normal();
      }
      rho = g * g.adjoint();
      rho /= rho.trace().real();
    }
    rho = (rho + rho.adjoint()) * 0.5;
    e.blocks[s] = weights(s) * rho;
  }
  return e;
}

SpinEnsemble random_pi_state(const SpinSectorLayout& layout, PurityMode mode, std::uint64_t seed,
                             double dirichlet_alpha) {
  Rng rng(seed);
  return random_pi_state(layout, mode, rng, dirichlet_alpha);
}

std::vector<Setting> random_settings(int count, Rng& rng) {
  if (count < 0) throw std::invalid_argument("setting count must be non-negative");
  std::vector<Setting> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(Setting::normalized(rng.unit_vector()));
  return out;
}

int determined_setting_count(int n_qubits) { return (n_qubits + 2) * (n_qubits + 1) / 2; }

// ---------------------------------------------------------------------------
// Data

Dataset exact_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                      std::int64_t nominal_repetitions) {
  if (nominal_repetitions < 1) throw std::invalid_argument("repetitions must be positive");
  Dataset d;
  d.n_qubits = state.n_qubits();
  d.exact = true;
  for (const auto& s : settings) {
    RealVector p = probabilities(state, rotated_blocks(d.n_qubits, s));
    p /= p.sum();
    d.records.push_back({s, p * static_cast<double>(nominal_repetitions), nominal_repetitions});
  }
  return d;
}

RealVector sample_counts(const RealVector& probs, std::int64_t trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("number of trials must be positive");
  if ((probs.array() < 0.0).any() || !(probs.sum() > 0.0)) {
    throw std::invalid_argument("invalid outcome distribution");
  }
  RealVector cdf(probs.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs(k);
    cdf(k) = acc;
  }
  cdf /= acc;
  Eigen::Index last = probs.size() - 1;
  while (last > 0 && probs(last) == 0.0) --last;
  RealVector counts = RealVector::Zero(probs.size());
  for (std::int64_t t = 0; t < trials; ++t) {
    const double u = rng.uniform();
    Eigen::Index k = 0;
    while (k < last && (u >= cdf(k) || probs(k) == 0.0)) ++k;
    counts(k) += 1.0;
  }
  return counts;
}

Dataset sample_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                       std::int64_t repetitions, Rng& rng) {
  Dataset d;
  d.n_qubits = state.n_qubits();
  d.exact = false;
  for (const auto& s : settings) {
    const RealVector p = probabilities(state, rotated_blocks(d.n_qubits, s));
    d.records.push_back({s, sample_counts(p, repetitions, rng), repetitions});
  }
  return d;
}

Dataset sample_dataset(const SpinEnsemble& state, const std::vector<Setting>& settings,
                       std::int64_t repetitions, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dataset(state, settings, repetitions, rng);
}

SpinEnsemble dicke_mixture_state(int n_qubits, const DickeMixtureParams& params, std::uint64_t seed) {
  if (!(params.p_asym >= 0.0 && params.p_asym <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(params.noise_weight >= 0.0 && params.noise_weight <= 1.0)) {
    throw std::invalid_argument("noise weight must lie in [0, 1]");
  }
  if (!std::isfinite(params.theta)) throw std::invalid_argument("theta must be finite");
  const SpinSectorLayout layout(n_qubits);
  const int top = layout.top_sector();
  SpinEnsemble aimed(layout);
  Matrix& block = aimed.blocks[top];
  for (int k = 0; k <= n_qubits; ++k) {
    block(k, k) = static_cast<double>(binomial(n_qubits, k)) * std::pow(params.p_asym, k) *
                  std::pow(1.0 - params.p_asym, n_qubits - k);
  }
  const Matrix w = hermitian_expm(spin_operators(layout.two_j(top)).s_y, params.theta);
  block = w * block * w.adjoint();
  block = (block + block.adjoint()) * 0.5;

  const SpinEnsemble noise = random_pi_state(layout, PurityMode::HilbertSchmidtMixed, seed);
  SpinEnsemble out(layout);
  for (int s = 0; s < layout.num_sectors(); ++s) {
    out.blocks[s] = (1.0 - params.noise_weight) * aimed.blocks[s] + params.noise_weight * noise.blocks[s];
  }
  return out;
}

}  // namespace pitomo
