#include "pitomo/pretest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace pitomo {

double PretestWitness::c_z_squared() const {
  double acc = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) {
    const double d = z_max(static_cast<int>(a)) - z_min(static_cast<int>(a));
    acc += d * d;
  }
  return acc;
}

void PretestWitness::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("witness: n_qubits must be positive");
  if (settings.empty() || settings.size() != z.size()) {
    throw std::invalid_argument("witness: need one coefficient vector per setting");
  }
  for (const auto& v : z) {
    if (v.size() != n_qubits + 1 || !v.allFinite()) {
      throw std::invalid_argument("witness: coefficient vectors must have N+1 finite entries");
    }
  }
}

namespace {

constexpr double kWitnessDecrementTol = 1e-14;

// Variables are stacked as [a * (N+1) + k].
class WitnessObjective final : public BarrierObjective {
 public:
  WitnessObjective(const std::vector<MeasurementBlockSet>& blocks, const RealVector& c, double delta,
                   double t)
      : blocks_(blocks), c_(c), delta_(delta), t_(t), layout_(blocks.front().layout()) {}

  int dimension() const override { return static_cast<int>(c_.size()); }

  std::vector<Matrix> slacks(const RealVector& z) const {
    std::vector<Matrix> out;
    const int outcomes = layout_.n_qubits() + 1;
    for (int s = 0; s < layout_.num_sectors(); ++s) {
      const int n = layout_.block_dim(s);
      Matrix sl = s == layout_.top_sector() ? Matrix(Matrix::Identity(n, n)) : Matrix(Matrix::Zero(n, n));
      for (std::size_t a = 0; a < blocks_.size(); ++a) {
        for (int k = 0; k < outcomes; ++k) {
          if (blocks_[a].present(k, s)) sl -= z(static_cast<Eigen::Index>(a) * outcomes + k) * blocks_[a].block(k, s);
        }
      }
      out.push_back((sl + sl.adjoint()) * 0.5);
    }
    return out;
  }

  std::vector<Eigen::LLT<Matrix>> factor(const std::vector<Matrix>& sl) const {
    std::vector<Eigen::LLT<Matrix>> out;
    for (const auto& m : sl) {
      Eigen::LLT<Matrix> llt(m);
      const Matrix l = llt.matrixL();
      if (llt.info() != Eigen::Success || !(l.diagonal().real().array() > 0.0).all()) {
        throw NonInteriorError("witness slack is not positive definite");
      }
      out.push_back(std::move(llt));
    }
    return out;
  }

  Evaluation evaluate(const RealVector& z, bool with_hessian) const override {
    const auto sl = slacks(z);
    const auto fac = factor(sl);
    const int outcomes = layout_.n_qubits() + 1;
    const int dim = dimension();
    Evaluation ev;
    ev.value = -c_.dot(z) + 0.5 * delta_ * z.squaredNorm();
    ev.gradient = -c_ + delta_ * z;
    if (with_hessian) {
      ev.hessian = RealMatrix::Zero(dim, dim);
      ev.hessian.diagonal().setConstant(delta_);
    }

    for (int s = 0; s < layout_.num_sectors(); ++s) {
      const Matrix l = fac[s].matrixL();
      ev.value -= t_ * 2.0 * l.diagonal().real().array().log().sum();
      // Whitened derivatives P_i = L^-1 M_i L^-H with dS/dz_i = -M_i.
      std::vector<int> vars;
      std::vector<Matrix> whitened;
      for (std::size_t a = 0; a < blocks_.size(); ++a) {
        for (int k = 0; k < outcomes; ++k) {
          if (!blocks_[a].present(k, s)) continue;
          const auto tri = fac[s].matrixL();
          const Matrix y = tri.solve(blocks_[a].block(k, s));
          Matrix p = tri.solve(Matrix(y.adjoint()));
          vars.push_back(static_cast<int>(a) * outcomes + k);
          whitened.push_back((p + p.adjoint()) * 0.5);
        }
      }
      for (std::size_t i = 0; i < vars.size(); ++i) {
        ev.gradient(vars[i]) += t_ * whitened[i].trace().real();
        if (!with_hessian) continue;
        for (std::size_t q = i; q < vars.size(); ++q) {
          const double h = t_ * (whitened[i].array() * whitened[q].array().conjugate()).sum().real();
          ev.hessian(vars[i], vars[q]) += h;
          if (q != i) ev.hessian(vars[q], vars[i]) += h;
        }
      }
    }
    return ev;
  }

  LineProbe probe(const RealVector& z, const RealVector& d) const override {
    const auto sl = slacks(z);
    const auto fac = factor(sl);
    // S(z + s d) = S(z) - s D with D = sum d_i M_i.
    const auto d_slack = slacks(d);
    std::vector<double> mu;
    LineProbe probe;
    for (int s = 0; s < layout_.num_sectors(); ++s) {
      const int n = layout_.block_dim(s);
      Matrix dm = (s == layout_.top_sector() ? Matrix(Matrix::Identity(n, n)) : Matrix(Matrix::Zero(n, n))) - d_slack[s];
      const auto tri = fac[s].matrixL();
      const Matrix y = tri.solve(dm);
      Matrix a = tri.solve(Matrix(y.adjoint()));
      a = (a + a.adjoint()) * 0.5;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double m = eig.eigenvalues()(i);
        mu.push_back(m);
        if (m > 0.0) probe.max_step = std::min(probe.max_step, 1.0 / m);
      }
    }
    const double lin = -c_.dot(d) + delta_ * z.dot(d);
    const double quad = 0.5 * delta_ * d.squaredNorm();
    const double t = t_;
    probe.delta = [=, mu = std::move(mu)](double s) {
      double acc = s * lin + s * s * quad;
      for (double m : mu) {
        if (s * m >= 1.0) return std::numeric_limits<double>::infinity();
        acc -= t * std::log1p(-s * m);
      }
      return acc;
    };
    return probe;
  }

 private:
  const std::vector<MeasurementBlockSet>& blocks_;
  RealVector c_;
  double delta_;
  double t_;
  SpinSectorLayout layout_;
};

PretestWitness unstack(int n, const std::vector<Setting>& settings, const RealVector& z) {
  PretestWitness w;
  w.n_qubits = n;
  w.settings = settings;
  for (std::size_t a = 0; a < settings.size(); ++a) {
    w.z.push_back(z.segment(static_cast<Eigen::Index>(a) * (n + 1), n + 1));
  }
  return w;
}

}  // namespace

PretestResult optimize_witness(const SpinEnsemble& target, const std::vector<Setting>& settings,
                               const PretestOptions& options) {
  target.validate();
  if (settings.empty()) throw std::invalid_argument("pretest needs at least one setting");
  if (!(options.regularization > 0.0)) throw std::invalid_argument("witness regularization must be positive");
  options.solver.validate();
  const int n = target.n_qubits();
  const auto blocks = rotated_blocks(n, settings);
  RealVector c(static_cast<Eigen::Index>(settings.size()) * (n + 1));
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    c.segment(static_cast<Eigen::Index>(a) * (n + 1), n + 1) = probabilities(target, blocks[a]);
  }

  PretestResult out;
  RealVector z = RealVector::Constant(c.size(), -1.0);
  out.converged = true;
  const auto& cfg = options.solver;
  for (int stage = 0;; ++stage) {
    double t = cfg.t0 / std::pow(cfg.t_reduce, stage);
    if (t < cfg.t_min) t = cfg.t_min;
    const WitnessObjective obj(blocks, c, options.regularization, t);
    NewtonConfig newton = cfg.newton;
    newton.decrement_tol = std::max(newton.decrement_tol, kWitnessDecrementTol);
    const NewtonOutcome res = newton_minimize(obj, z, newton);
    z = res.x;
    out.iterations += res.iterations;
    if (!res.converged) {
      out.converged = false;
      out.message = res.message;
      if (cfg.abort_on_stage_failure) break;
    }
    if (t <= cfg.t_min) break;
  }
  out.witness = unstack(n, settings, z);
  out.objective = c.dot(z);
  return out;
}

std::vector<Matrix> witness_blocks(const PretestWitness& w) {
  w.validate();
  const SpinSectorLayout layout(w.n_qubits);
  const auto blocks = rotated_blocks(w.n_qubits, w.settings);
  std::vector<Matrix> out;
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const int n = layout.block_dim(s);
    Matrix zb = Matrix::Zero(n, n);
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      for (int k = 0; k <= w.n_qubits; ++k) {
        if (blocks[a].present(k, s)) zb += w.z[a](k) * blocks[a].block(k, s);
      }
    }
    out.push_back((zb + zb.adjoint()) * 0.5);
  }
  return out;
}

Feasibility witness_feasibility(const PretestWitness& w) {
  const SpinSectorLayout layout(w.n_qubits);
  const auto zb = witness_blocks(w);
  Feasibility f;
  f.max_violation = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < layout.num_sectors(); ++s) {
    double v = max_eigenvalue(zb[s]);
    if (s == layout.top_sector()) v -= 1.0;
    f.per_sector.push_back(v);
    f.max_violation = std::max(f.max_violation, v);
  }
  return f;
}

double witness_expectation(const PretestWitness& w, const SpinEnsemble& state) {
  w.validate();
  if (state.n_qubits() != w.n_qubits) throw std::invalid_argument("state and witness sizes differ");
  double acc = 0.0;
  for (std::size_t a = 0; a < w.settings.size(); ++a) {
    acc += w.z[a].dot(probabilities(state, rotated_blocks(w.n_qubits, w.settings[a])));
  }
  return acc;
}

namespace {

void check_records(const PretestWitness& w, const Dataset& data) {
  w.validate();
  data.validate();
  if (data.n_qubits != w.n_qubits) throw std::invalid_argument("dataset and witness sizes differ");
  if (data.records.size() != w.settings.size()) {
    throw std::invalid_argument("dataset must have one record per witness setting");
  }
  for (std::size_t a = 0; a < w.settings.size(); ++a) {
    if ((data.records[a].setting.axis - w.settings[a].axis).norm() > 1e-9) {
      throw std::invalid_argument("dataset record " + std::to_string(a) +
                                  " does not match the witness setting");
    }
  }
}

}  // namespace

double witness_expectation(const PretestWitness& w, const Dataset& data) {
  check_records(w, data);
  double acc = 0.0;
  for (std::size_t a = 0; a < w.settings.size(); ++a) acc += w.z[a].dot(data.records[a].frequencies());
  return acc;
}

double fidelity_bound(double expectation) { return expectation >= 0.0 ? expectation * expectation : 0.0; }

double fidelity_bound(const PretestWitness& w, const SpinEnsemble& state) {
  return fidelity_bound(witness_expectation(w, state));
}

double fidelity_bound(const PretestWitness& w, const Dataset& data) {
  return fidelity_bound(witness_expectation(w, data));
}

StatisticalBound statistical_bound(const PretestWitness& w, const Dataset& data, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  check_records(w, data);
  const std::int64_t reps = data.records.front().repetitions;
  for (const auto& r : data.records) {
    if (r.repetitions != reps) throw std::invalid_argument("all records must share one repetition number");
  }
  StatisticalBound out;
  out.mean = witness_expectation(w, data);
  const double shifted = out.mean - epsilon;
  out.bound = std::max(-1.0, (shifted >= 0.0 ? 1.0 : -1.0) * shifted * shifted);
  const double cz2 = w.c_z_squared();
  out.confidence = cz2 > 0.0 ? 1.0 - std::exp(-2.0 * static_cast<double>(reps) * epsilon * epsilon / cz2)
                             : 1.0;
  return out;
}

double epsilon_for_confidence(const PretestWitness& w, std::int64_t repetitions, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be positive");
  return std::sqrt(-std::log(1.0 - confidence) * w.c_z_squared() / (2.0 * static_cast<double>(repetitions)));
}

}  // namespace pitomo
