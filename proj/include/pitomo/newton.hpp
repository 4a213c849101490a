#pragma once

// Damped Newton minimization of barrier-augmented convex objectives.
//
// The engine is agnostic of what the parameters mean. Objectives report value,
// gradient and Hessian at a point and, for a search direction, the supremum of
// strictly feasible step lengths together with the exact increment
// phi(x + s d) - phi(x). Computing the increment directly instead of two
// absolute values keeps the Armijo test meaningful when the predicted decrease
// is far below the rounding error of phi itself.

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "pitomo/spin_blocks.hpp"

namespace pitomo {

/// Thrown when an objective is evaluated outside its strictly feasible domain.
class NonInteriorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct NewtonConfig {
  double grad_tol = 1e-8;
  double ls_alpha = 0.01;   // (0, 0.5)
  double ls_shrink = 0.5;   // (0, 1)
  int max_iters = 200;
  /// Also stop once half the squared Newton decrement -g.d / 2 falls to this
  /// value; 0 disables the test.
  double decrement_tol = 0.0;

  void validate() const;
};

struct Evaluation {
  double value = 0.0;
  RealVector gradient;
  RealMatrix hessian;  // empty unless requested
};

struct LineProbe {
  double max_step = std::numeric_limits<double>::infinity();
  std::function<double(double)> delta;
};

class BarrierObjective {
 public:
  virtual ~BarrierObjective() = default;
  virtual int dimension() const = 0;
  /// Throws NonInteriorError outside the domain.
  virtual Evaluation evaluate(const RealVector& x, bool with_hessian) const = 0;
  virtual LineProbe probe(const RealVector& x, const RealVector& direction) const = 0;
};

struct NewtonOutcome {
  RealVector x;
  int iterations = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string message;
};

using IterateCallback =
    std::function<void(int iteration, const RealVector& x, double value, double grad_norm)>;

/// Solves H d = -g by Cholesky. On failure a ridge 1e-12 (1 + max diag H) is
/// added and escalated by 10x up to three times before giving up with
/// std::runtime_error.
RealVector solve_newton_system(const RealMatrix& hessian, const RealVector& gradient);

/// Damped Newton iteration with feasibility-aware backtracking. Stops when
/// ||grad||_2 <= grad_tol (or the decrement test passes), after max_iters
/// steps, or when the line search cannot make progress; the outcome records
/// which. The callback sees the new iterate together with the value and
/// gradient norm of the point the step started from.
NewtonOutcome newton_minimize(const BarrierObjective& objective, RealVector x_start,
                              const NewtonConfig& config, const IterateCallback& on_iterate = {});

}  // namespace pitomo
