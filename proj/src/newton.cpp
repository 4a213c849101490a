#include "pitomo/newton.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

namespace pitomo {

void NewtonConfig::validate() const {
  if (!(grad_tol > 0.0)) throw std::invalid_argument("newton gradient tolerance must be positive");
  if (!(ls_alpha > 0.0 && ls_alpha < 0.5)) throw std::invalid_argument("ls_alpha must lie in (0, 0.5)");
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) throw std::invalid_argument("ls_shrink must lie in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("max_newton_iters must be positive");
  if (!(decrement_tol >= 0.0)) throw std::invalid_argument("decrement tolerance must be non-negative");
}

RealVector solve_newton_system(const RealMatrix& hessian, const RealVector& gradient) {
  Eigen::LLT<RealMatrix> llt(hessian);
  if (llt.info() == Eigen::Success) {
    RealVector d = -llt.solve(gradient);
    if (d.allFinite()) return d;
  }
  const double max_diag = hessian.diagonal().cwiseAbs().maxCoeff();
  double ridge = 1e-12 * (1.0 + max_diag);
  for (int attempt = 0; attempt < 3; ++attempt, ridge *= 10.0) {
    RealMatrix shifted = hessian;
    shifted.diagonal().array() += ridge;
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) continue;
    RealVector d = -llt.solve(gradient);
    if (d.allFinite()) return d;
  }
  throw std::runtime_error("Newton system is not positive definite");
}

NewtonOutcome newton_minimize(const BarrierObjective& objective, RealVector x_start,
                              const NewtonConfig& config, const IterateCallback& on_iterate) {
  config.validate();
  NewtonOutcome out;
  out.x = std::move(x_start);
  constexpr double kMinStep = 1e-18;

  for (;;) {
    Evaluation ev = objective.evaluate(out.x, false);
    out.value = ev.value;
    out.grad_norm = ev.gradient.norm();
    if (!std::isfinite(out.grad_norm)) {
      out.message = "non-finite gradient";
      return out;
    }
    if (out.grad_norm <= config.grad_tol) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= config.max_iters) {
      std::ostringstream msg;
      msg << "iteration limit " << config.max_iters << " reached, gradient norm " << out.grad_norm;
      out.message = msg.str();
      return out;
    }

    ev = objective.evaluate(out.x, true);
    RealVector step;
    try {
      step = solve_newton_system(ev.hessian, ev.gradient);
    } catch (const std::runtime_error& err) {
      out.message = err.what();
      return out;
    }
    double slope = ev.gradient.dot(step);
    if (!(slope < 0.0)) {
      step = -ev.gradient;
      slope = -ev.gradient.squaredNorm();
    } else if (-0.5 * slope <= config.decrement_tol) {
      out.converged = true;
      out.message = "Newton decrement below tolerance";
      return out;
    }

    const LineProbe line = objective.probe(out.x, step);
    double s = 1.0;
    while (s >= line.max_step && s > kMinStep) s *= config.ls_shrink;
    bool accepted = false;
    while (s > kMinStep) {
      const double delta = line.delta(s);
      if (std::isfinite(delta) && delta <= config.ls_alpha * s * slope) {
        accepted = true;
        break;
      }
      s *= config.ls_shrink;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search stalled at gradient norm " << out.grad_norm;
      out.message = msg.str();
      return out;
    }
    out.x += s * step;
    ++out.iterations;
    if (on_iterate) on_iterate(out.iterations, out.x, out.value, out.grad_norm);
  }
}

}  // namespace pitomo
