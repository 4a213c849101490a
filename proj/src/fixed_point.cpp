#include <cmath>
#include <stdexcept>

#include "pitomo/reconstruct.hpp"

namespace pitomo {

FixedPointResult fixed_point_reconstruct(const Dataset& data, int iterations, const SpinEnsemble* start) {
  data.validate();
  if (iterations < 0) throw std::invalid_argument("iteration count must be non-negative");
  const SpinSectorLayout layout(data.n_qubits);
  if (start != nullptr && start->layout != layout) {
    throw std::invalid_argument("start ensemble does not match the dataset size");
  }
  const auto blocks = rotated_blocks(data.n_qubits, data.settings());
  const FitSpec ml = FitSpec::max_lik();
  const RealVector f = data.stacked_frequencies();
  const int outcomes = data.n_qubits + 1;

  FixedPointResult out(layout);
  out.estimate = start != nullptr ? *start : SpinEnsemble::maximally_mixed(layout);

  auto stacked_probs = [&](const SpinEnsemble& rho) {
    RealVector p(f.size());
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      p.segment(static_cast<Eigen::Index>(a) * outcomes, outcomes) = probabilities(rho, blocks[a]);
    }
    return p;
  };

  RealVector p = stacked_probs(out.estimate);
  out.fit_trace.push_back(fit_value(ml, f, p));
  for (int it = 0; it < iterations; ++it) {
    std::vector<Matrix> next(layout.num_sectors());
    double norm = 0.0;
    for (int s = 0; s < layout.num_sectors(); ++s) {
      const int dim = layout.block_dim(s);
      Matrix r = Matrix::Zero(dim, dim);
      for (std::size_t a = 0; a < blocks.size(); ++a) {
        for (int k = 0; k < outcomes; ++k) {
          const auto idx = static_cast<Eigen::Index>(a) * outcomes + k;
          if (f(idx) == 0.0 || !blocks[a].present(k, s)) continue;
          if (!(p(idx) > 0.0)) {
            throw std::domain_error("observed outcome has zero probability under the iterate");
          }
          r += (f(idx) / p(idx)) * blocks[a].block(k, s);
        }
      }
      next[s] = r * out.estimate.blocks[s] * r.adjoint();
      next[s] = (next[s] + next[s].adjoint()) * 0.5;
      norm += next[s].trace().real();
    }
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::domain_error("fixed-point normalization vanished");
    }
    for (int s = 0; s < layout.num_sectors(); ++s) out.estimate.blocks[s] = next[s] / norm;
    p = stacked_probs(out.estimate);
    out.fit_trace.push_back(fit_value(ml, f, p));
  }
  return out;
}

}  // namespace pitomo
