#include "pitomo/design.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "pitomo/sim.hpp"

namespace pitomo {

namespace {

constexpr double kRankTol = 1e-10;

// Monomials of one weight, in bloch_indices order.
std::vector<BlochIndex> monomials(int weight) {
  std::vector<BlochIndex> out;
  for (int k = 0; k <= weight; ++k) {
    for (int l = 0; k + l <= weight; ++l) out.push_back({k, l, weight - k - l, 0});
  }
  return out;
}

int monomial_position(const BlochIndex& idx) {
  // Rows k' < k contribute (w - k' + 1) entries each.
  const int w = idx.weight();
  int pos = 0;
  for (int kk = 0; kk < idx.k; ++kk) pos += w - kk + 1;
  return pos + idx.l;
}

double multinomial3(int w, int k, int l) {
  return static_cast<double>(binomial(w, k)) * static_cast<double>(binomial(w - k, l));
}

}  // namespace

std::vector<BlochIndex> bloch_indices(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("bloch_indices: N must be positive");
  std::vector<BlochIndex> out;
  for (int w = 0; w <= n_qubits; ++w) {
    for (auto idx : monomials(w)) {
      idx.n = n_qubits - w;
      out.push_back(idx);
    }
  }
  return out;
}

double multinomial(const BlochIndex& idx) {
  const int total = idx.k + idx.l + idx.m + idx.n;
  return static_cast<double>(binomial(total, idx.n)) * multinomial3(idx.weight(), idx.k, idx.l);
}

DesignProblem::DesignProblem(int n, SpinEnsemble tar, double noise)
    : n_qubits(n), target(std::move(tar)), noise_constant(noise) {
  validate();
}

void DesignProblem::validate() const {
  if (target.n_qubits() != n_qubits) throw std::invalid_argument("design target has the wrong size");
  if (!(noise_constant > 0.0)) throw std::invalid_argument("noise constant must be positive");
  target.validate();
}

RankDeficientError::RankDeficientError(int weight, int rank, int required, double residual)
    : std::runtime_error("settings do not resolve weight " + std::to_string(weight) + " (rank " +
                         std::to_string(rank) + " of " + std::to_string(required) +
                         ", residual " + std::to_string(residual) + ")"),
      weight_(weight),
      rank_(rank),
      required_(required),
      residual_(residual) {}

RealMatrix bloch_design_matrix(const std::vector<Setting>& settings, int weight) {
  if (weight < 0) throw std::invalid_argument("weight must be non-negative");
  const auto monos = monomials(weight);
  RealMatrix g(static_cast<Eigen::Index>(settings.size()), static_cast<Eigen::Index>(monos.size()));
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const Vector3& a = settings[i].axis;
    for (std::size_t c = 0; c < monos.size(); ++c) {
      const auto& mo = monos[c];
      g(i, c) = multinomial3(weight, mo.k, mo.l) * std::pow(a.x(), mo.k) * std::pow(a.y(), mo.l) *
                std::pow(a.z(), mo.m);
    }
  }
  return g;
}

WeightSolution solve_weight(const std::vector<Setting>& settings, int weight) {
  if (settings.empty()) throw std::invalid_argument("no settings given");
  const RealMatrix g = bloch_design_matrix(settings, weight);
  WeightSolution sol;
  sol.weight = weight;
  sol.required_rank = static_cast<int>(g.cols());
  // G^T C = 1 has min-norm solution C = pinv(G^T) = U S^-1 V^T for G = U S V^T.
  Eigen::JacobiSVD<RealMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double cutoff = kRankTol * (sv.size() > 0 ? sv(0) : 0.0);
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      inv(i) = 1.0 / sv(i);
      ++sol.rank;
    }
  }
  sol.coefficients = svd.matrixU() * inv.asDiagonal() * svd.matrixV().transpose();
  const RealMatrix check = g.transpose() * sol.coefficients -
                           RealMatrix::Identity(g.cols(), g.cols());
  sol.residual = check.cwiseAbs().maxCoeff();
  return sol;
}

RealVector bloch_coefficients(const std::vector<Setting>& settings, const BlochIndex& idx) {
  const WeightSolution sol = solve_weight(settings, idx.weight());
  if (!sol.full_rank()) {
    throw RankDeficientError(idx.weight(), sol.rank, sol.required_rank, sol.residual);
  }
  return sol.coefficients.col(monomial_position(idx));
}

SettingMoments setting_moments(const SpinEnsemble& target, const std::vector<Setting>& settings,
                               int weight) {
  const RealVector kc = moment_coefficients(target.n_qubits(), weight);
  SettingMoments out;
  out.mean.resize(static_cast<Eigen::Index>(settings.size()));
  out.variance.resize(static_cast<Eigen::Index>(settings.size()));
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const RealVector p = probabilities(target, rotated_blocks(target.n_qubits(), settings[i]));
    const double mean = kc.dot(p);
    out.mean(i) = mean;
    out.variance(i) = std::max(0.0, kc.array().square().matrix().dot(p) - mean * mean);
  }
  return out;
}

double element_error(const DesignProblem& problem, const std::vector<Setting>& settings,
                     const BlochIndex& idx) {
  if (idx.k + idx.l + idx.m + idx.n != problem.n_qubits || idx.k < 0 || idx.l < 0 || idx.m < 0 ||
      idx.n < 0) {
    throw std::invalid_argument("Bloch index does not match the number of qubits");
  }
  const RealVector c = bloch_coefficients(settings, idx);
  const SettingMoments mom = setting_moments(problem.target, settings, idx.weight());
  return problem.noise_constant * c.array().square().matrix().dot(mom.variance);
}

double total_error(const DesignProblem& problem, const std::vector<Setting>& settings) {
  const int n = problem.n_qubits;
  // Probabilities are shared by all weights.
  std::vector<RealVector> probs;
  probs.reserve(settings.size());
  for (const auto& s : settings) probs.push_back(probabilities(problem.target, rotated_blocks(n, s)));

  double total = 0.0;
  for (int w = 1; w <= n; ++w) {
    const WeightSolution sol = solve_weight(settings, w);
    if (!sol.full_rank()) throw RankDeficientError(w, sol.rank, sol.required_rank, sol.residual);
    const RealVector kc = moment_coefficients(n, w);
    RealVector var(static_cast<Eigen::Index>(settings.size()));
    for (std::size_t i = 0; i < settings.size(); ++i) {
      const double mean = kc.dot(probs[i]);
      var(i) = std::max(0.0, kc.array().square().matrix().dot(probs[i]) - mean * mean);
    }
    const RealVector per_mono = sol.coefficients.array().square().matrix().transpose() * var;
    const auto monos = monomials(w);
    const double outer = static_cast<double>(binomial(n, w));
    for (std::size_t c = 0; c < monos.size(); ++c) {
      total += outer * multinomial3(w, monos[c].k, monos[c].l) * per_mono(c);
    }
  }
  // Weight 0 is the identity, whose estimate has no variance.
  return problem.noise_constant * total;
}

void check_distinct_settings(const std::vector<Setting>& settings, double tol) {
  for (std::size_t i = 0; i < settings.size(); ++i) {
    for (std::size_t j = i + 1; j < settings.size(); ++j) {
      const double d = std::min((settings[i].axis - settings[j].axis).norm(),
                                (settings[i].axis + settings[j].axis).norm());
      if (d < tol) {
        throw std::invalid_argument("settings " + std::to_string(i) + " and " + std::to_string(j) +
                                    " coincide up to sign");
      }
    }
  }
}

void DesignOptions::validate() const {
  if (!(p_mix > 0.0 && p_mix < 1.0)) throw std::invalid_argument("p_mix must lie in (0, 1)");
  if (max_stall < 1) throw std::invalid_argument("max_stall must be positive");
  if (max_proposals < 1) throw std::invalid_argument("max_proposals must be positive");
}

namespace {

double error_or_infinity(const DesignProblem& problem, const std::vector<Setting>& settings) {
  try {
    check_distinct_settings(settings);
    return total_error(problem, settings);
  } catch (const RankDeficientError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const std::invalid_argument&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

DesignResult optimize_settings(const DesignProblem& problem, std::vector<Setting> initial,
                               std::uint64_t seed, const DesignOptions& options) {
  options.validate();
  problem.validate();
  if (initial.empty()) throw std::invalid_argument("optimize_settings needs at least one setting");
  Rng rng(seed);
  DesignResult out;
  out.settings = std::move(initial);
  out.total_error = error_or_infinity(problem, out.settings);
  out.trace.push_back({0, out.total_error});

  int stall = 0;
  while (stall < options.max_stall && out.proposals < options.max_proposals) {
    std::vector<Setting> proposal;
    proposal.reserve(out.settings.size());
    for (const auto& s : out.settings) {
      const Vector3 r = rng.unit_vector();
      Vector3 v = options.p_mix * s.axis + (1.0 - options.p_mix) * r;
      if (v.norm() < 1e-12) v = s.axis;
      proposal.push_back(Setting::normalized(v));
    }
    ++out.proposals;
    const double err = error_or_infinity(problem, proposal);
    if (err < out.total_error) {
      out.settings = std::move(proposal);
      out.total_error = err;
      out.trace.push_back({out.proposals, err});
      stall = 0;
    } else {
      ++stall;
    }
  }
  return out;
}

DesignResult optimize_settings(const DesignProblem& problem, int count, std::uint64_t seed,
                               const DesignOptions& options) {
  Rng init(seed ^ 0x9e3779b97f4a7c15ULL);
  return optimize_settings(problem, random_settings(count, init), seed, options);
}

}  // namespace pitomo
