#include "pitomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace pitomo {

std::string to_string(FitPrinciple p) {
  switch (p) {
    case FitPrinciple::MaxLik: return "ml";
    case FitPrinciple::LeastSquares: return "ls";
    case FitPrinciple::FreeLeastSquares: return "freels";
    case FitPrinciple::HedgedMaxLik: return "hedged";
  }
  return "?";
}

FitPrinciple parse_principle(const std::string& name) {
  if (name == "ml" || name == "MaxLik") return FitPrinciple::MaxLik;
  if (name == "ls" || name == "LeastSquares") return FitPrinciple::LeastSquares;
  if (name == "freels" || name == "FreeLeastSquares") return FitPrinciple::FreeLeastSquares;
  if (name == "hedged" || name == "HedgedMaxLik") return FitPrinciple::HedgedMaxLik;
  throw std::invalid_argument("unknown reconstruction principle '" + name + "'");
}

FitSpec FitSpec::least_squares(RealVector weights) {
  FitSpec s;
  s.principle = FitPrinciple::LeastSquares;
  s.ls_weights = std::move(weights);
  return s;
}

FitSpec FitSpec::free_least_squares() {
  FitSpec s;
  s.principle = FitPrinciple::FreeLeastSquares;
  return s;
}

FitSpec FitSpec::hedged(double beta) {
  FitSpec s;
  s.principle = FitPrinciple::HedgedMaxLik;
  s.beta = beta;
  return s;
}

void FitSpec::validate() const {
  if (principle == FitPrinciple::LeastSquares) {
    if (ls_weights.size() > 0 && !(ls_weights.array() > 0.0).all()) {
      throw std::invalid_argument("least-squares weights must be strictly positive");
    }
    if (!(weight_floor_scale > 0.0)) throw std::invalid_argument("weight floor scale must be positive");
  }
  if (principle == FitPrinciple::HedgedMaxLik && !(beta > 0.0)) {
    throw std::invalid_argument("hedging parameter beta must be positive");
  }
}

RealVector default_ls_weights(const Dataset& data, double floor_scale) {
  const int outcomes = data.n_qubits + 1;
  RealVector w(static_cast<Eigen::Index>(data.records.size()) * outcomes);
  for (std::size_t a = 0; a < data.records.size(); ++a) {
    const auto& rec = data.records[a];
    const RealVector f = rec.frequencies();
    const double floor = 1.0 / (floor_scale * static_cast<double>(rec.repetitions));
    for (int k = 0; k < outcomes; ++k) {
      w(static_cast<Eigen::Index>(a) * outcomes + k) = 1.0 / std::max(f(k), floor);
    }
  }
  return w;
}

double fit_value(const FitSpec& spec, const RealVector& f, const RealVector& p) {
  if (f.size() != p.size()) throw std::invalid_argument("fit_value: size mismatch");
  double value = 0.0;
  switch (spec.principle) {
    case FitPrinciple::MaxLik:
    case FitPrinciple::HedgedMaxLik:
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (f(i) == 0.0) continue;
        if (!(p(i) > 0.0)) throw NonInteriorError("likelihood term with non-positive probability");
        value -= f(i) * std::log(p(i));
      }
      return value;
    case FitPrinciple::LeastSquares:
      if (spec.ls_weights.size() != f.size()) {
        throw std::invalid_argument("fit_value: least-squares weights missing or mis-sized");
      }
      return (spec.ls_weights.array() * (f - p).array().square()).sum();
    case FitPrinciple::FreeLeastSquares:
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (!(p(i) > 0.0)) throw NonInteriorError("free least squares needs positive probabilities");
        const double r = f(i) - p(i);
        value += r * r / p(i);
      }
      return value;
  }
  return value;
}

// ---------------------------------------------------------------------------
// Parametrization

Parametrization::Parametrization(const SpinSectorLayout& layout)
    : layout_(layout), base_(SpinEnsemble::maximally_mixed(layout)), touching_(layout.num_sectors()) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const int n = layout.block_dim(s);
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) {
        elements_.push_back({{{s, {{r, c, inv_sqrt2}, {c, r, inv_sqrt2}}}}});
        elements_.push_back(
            {{{s, {{r, c, Complex(0.0, -inv_sqrt2)}, {c, r, Complex(0.0, inv_sqrt2)}}}}});
      }
    }
    for (int l = 1; l < n; ++l) {
      const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
      std::vector<Entry> entries;
      for (int q = 0; q < l; ++q) entries.push_back({q, q, norm});
      entries.push_back({l, l, -l * norm});
      elements_.push_back({{{s, std::move(entries)}}});
    }
  }

  const int sectors = layout.num_sectors();
  if (sectors > 1) {
    RealVector u(sectors);
    for (int s = 0; s < sectors; ++s) u(s) = std::sqrt(static_cast<double>(layout.block_dim(s)));
    u /= u.norm();
    const RealMatrix u_mat = u;
    Eigen::HouseholderQR<RealMatrix> qr(u_mat);
    const RealMatrix q = qr.householderQ() * RealMatrix::Identity(sectors, sectors);
    for (int col = 1; col < sectors; ++col) {
      Element el;
      for (int s = 0; s < sectors; ++s) {
        const int n = layout.block_dim(s);
        const double v = q(s, col) / std::sqrt(static_cast<double>(n));
        std::vector<Entry> entries;
        for (int d = 0; d < n; ++d) entries.push_back({d, d, v});
        el.parts.emplace_back(s, std::move(entries));
      }
      elements_.push_back(std::move(el));
    }
  }

  for (int i = 0; i < dimension(); ++i) {
    for (const auto& part : elements_[i].parts) touching_[part.first].push_back(i);
  }
}

SpinEnsemble Parametrization::state(const RealVector& x) const {
  if (x.size() != dimension()) throw std::invalid_argument("parameter vector has wrong size");
  SpinEnsemble e = base_;
  for (int i = 0; i < dimension(); ++i) {
    if (x(i) == 0.0) continue;
    for (const auto& [s, entries] : elements_[i].parts) {
      for (const auto& en : entries) e.blocks[s](en.row, en.col) += x(i) * en.value;
    }
  }
  return e;
}

std::vector<Matrix> Parametrization::direction(const RealVector& d) const {
  if (d.size() != dimension()) throw std::invalid_argument("direction vector has wrong size");
  std::vector<Matrix> blocks = SpinEnsemble::zeros(layout_).blocks;
  for (int i = 0; i < dimension(); ++i) {
    if (d(i) == 0.0) continue;
    for (const auto& [s, entries] : elements_[i].parts) {
      for (const auto& en : entries) blocks[s](en.row, en.col) += d(i) * en.value;
    }
  }
  return blocks;
}

std::vector<Matrix> Parametrization::element(int i) const {
  std::vector<Matrix> blocks = SpinEnsemble::zeros(layout_).blocks;
  for (const auto& [s, entries] : elements_.at(i).parts) {
    for (const auto& en : entries) blocks[s](en.row, en.col) += en.value;
  }
  return blocks;
}

RealVector Parametrization::coordinates(const std::vector<Matrix>& blocks) const {
  if (static_cast<int>(blocks.size()) != layout_.num_sectors()) {
    throw std::invalid_argument("coordinates: wrong number of blocks");
  }
  RealVector c(dimension());
  for (int i = 0; i < dimension(); ++i) {
    double acc = 0.0;
    for (const auto& [s, entries] : elements_[i].parts) {
      for (const auto& en : entries) acc += (en.value * blocks[s](en.col, en.row)).real();
    }
    c(i) = acc;
  }
  return c;
}

RealVector Parametrization::coordinates_of(const SpinEnsemble& e) const {
  if (e.layout != layout_) throw std::invalid_argument("coordinates_of: layout mismatch");
  std::vector<Matrix> diff = e.blocks;
  for (int s = 0; s < layout_.num_sectors(); ++s) diff[s] -= base_.blocks[s];
  return coordinates(diff);
}

RealMatrix Parametrization::congruence_hessian(const std::vector<Matrix>& x_blocks) const {
  RealMatrix h = RealMatrix::Zero(dimension(), dimension());
  for (int s = 0; s < layout_.num_sectors(); ++s) {
    const Matrix& x = x_blocks.at(s);
    const auto& idx = touching_[s];
    // Locate the part of each touching element that lives in sector s.
    std::vector<const std::vector<Entry>*> parts(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (const auto& [sec, entries] : elements_[idx[a]].parts) {
        if (sec == s) parts[a] = &entries;
      }
    }
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) {
        // tr(X B_a X B_b) = sum_{e in a, f in b} v_e v_f X(c_f, r_e) X(c_e, r_f)
        Complex acc = 0.0;
        for (const auto& e : *parts[a]) {
          for (const auto& f : *parts[b]) {
            acc += e.value * f.value * x(f.col, e.row) * x(e.col, f.row);
          }
        }
        h(idx[a], idx[b]) += acc.real();
      }
    }
  }
  return h.selfadjointView<Eigen::Upper>();
}

// ---------------------------------------------------------------------------
// Problem and objective

void SolverConfig::validate() const {
  if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(t_reduce > 1.0)) throw std::invalid_argument("t_reduce must exceed 1");
  if (!(t_min > 0.0) || t_min > t0) throw std::invalid_argument("t_min must lie in (0, t0]");
  newton.validate();
}

namespace {

RealMatrix weighted_gram(const RealMatrix& g, const RealVector& c) {
  const RealMatrix scaled = c.array().sqrt().matrix().asDiagonal() * g;
  RealMatrix h = RealMatrix::Zero(g.cols(), g.cols());
  h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  return h.selfadjointView<Eigen::Lower>();
}

struct BlockFactor {
  std::vector<Eigen::LLT<Matrix>> llt;
};

BlockFactor factor_blocks(const SpinEnsemble& rho) {
  BlockFactor f;
  f.llt.reserve(rho.blocks.size());
  for (std::size_t s = 0; s < rho.blocks.size(); ++s) {
    const Matrix herm = (rho.blocks[s] + rho.blocks[s].adjoint()) * 0.5;
    Eigen::LLT<Matrix> llt(herm);
    if (llt.info() != Eigen::Success) {
      throw NonInteriorError("state is not positive definite in sector " + std::to_string(s));
    }
    const auto diag = llt.matrixL().toDenseMatrix().diagonal().real();
    if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
      throw NonInteriorError("state is not positive definite in sector " + std::to_string(s));
    }
    f.llt.push_back(std::move(llt));
  }
  return f;
}

}  // namespace

ReconstructionProblem::ReconstructionProblem(const Dataset& data, FitSpec spec)
    : data_(data), spec_(std::move(spec)), param_(SpinSectorLayout(data.n_qubits)) {
  data_.validate();
  spec_.validate();
  if (data_.records.empty()) throw std::invalid_argument("dataset has no records");
  const int n = data_.n_qubits;
  const int outcomes = n + 1;
  const auto rows = static_cast<Eigen::Index>(data_.records.size()) * outcomes;

  blocks_ = rotated_blocks(n, data_.settings());
  overlaps_.resize(rows, param_.dimension());
  base_probs_.resize(rows);
  for (std::size_t a = 0; a < blocks_.size(); ++a) {
    const RealVector pb = pitomo::probabilities(param_.base_point(), blocks_[a]);
    for (int k = 0; k < outcomes; ++k) {
      std::vector<Matrix> mk = SpinEnsemble::zeros(param_.layout()).blocks;
      for (int s = 0; s < param_.layout().num_sectors(); ++s) {
        if (blocks_[a].present(k, s)) mk[s] = blocks_[a].block(k, s);
      }
      const auto row = static_cast<Eigen::Index>(a) * outcomes + k;
      overlaps_.row(row) = param_.coordinates(mk).transpose();
      base_probs_(row) = pb(k);
    }
  }
  freqs_ = data_.stacked_frequencies();

  if (spec_.principle == FitPrinciple::LeastSquares) {
    if (spec_.ls_weights.size() == 0) {
      spec_.ls_weights = default_ls_weights(data_, spec_.weight_floor_scale);
    } else if (spec_.ls_weights.size() != rows) {
      throw std::invalid_argument("least-squares weights do not match the dataset");
    }
    weights_ = spec_.ls_weights;
    ls_hessian_ = 2.0 * weighted_gram(overlaps_, weights_);
  }
}

RealVector ReconstructionProblem::probabilities(const RealVector& x) const {
  return base_probs_ + overlaps_ * x;
}

double ReconstructionProblem::fit_value(const RealVector& x) const {
  return pitomo::fit_value(spec_, freqs_, probabilities(x));
}

RealVector ReconstructionProblem::fit_gradient(const RealVector& x) const {
  const RealVector p = probabilities(x);
  const auto& f = freqs_;
  RealVector coeff(p.size());
  switch (spec_.principle) {
    case FitPrinciple::MaxLik:
    case FitPrinciple::HedgedMaxLik:
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (f(i) == 0.0) {
          coeff(i) = 0.0;
          continue;
        }
        if (!(p(i) > 0.0)) throw NonInteriorError("likelihood term with non-positive probability");
        coeff(i) = -f(i) / p(i);
      }
      break;
    case FitPrinciple::LeastSquares:
      coeff = -2.0 * (weights_.array() * (f - p).array()).matrix();
      break;
    case FitPrinciple::FreeLeastSquares:
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p(i) > 0.0)) throw NonInteriorError("free least squares needs positive probabilities");
        coeff(i) = 1.0 - (f(i) * f(i)) / (p(i) * p(i));
      }
      break;
  }
  return overlaps_.transpose() * coeff;
}

std::pair<RealVector, RealMatrix> ReconstructionProblem::fit_gradient_hessian(
    const RealVector& x) const {
  RealVector grad = fit_gradient(x);
  const RealVector p = probabilities(x);
  const auto& f = freqs_;
  switch (spec_.principle) {
    case FitPrinciple::MaxLik:
    case FitPrinciple::HedgedMaxLik: {
      RealVector c = (f.array() / p.array().square()).matrix();
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (f(i) == 0.0) c(i) = 0.0;
      }
      return {std::move(grad), weighted_gram(overlaps_, c)};
    }
    case FitPrinciple::LeastSquares:
      return {std::move(grad), ls_hessian_};
    case FitPrinciple::FreeLeastSquares: {
      const RealVector c = (2.0 * f.array().square() / p.array().cube()).matrix();
      return {std::move(grad), weighted_gram(overlaps_, c)};
    }
  }
  throw std::logic_error("unhandled principle");
}

ReconstructionProblem::BarrierTerms ReconstructionProblem::barrier(const RealVector& x, double t,
                                                                   bool with_hessian) const {
  const SpinEnsemble rho = param_.state(x);
  const BlockFactor factor = factor_blocks(rho);
  BarrierTerms out;
  std::vector<Matrix> inv(rho.blocks.size());
  double logdet = 0.0;
  for (std::size_t s = 0; s < rho.blocks.size(); ++s) {
    const auto& llt = factor.llt[s];
    const Matrix l = llt.matrixL();
    logdet += 2.0 * l.diagonal().real().array().log().sum();
    inv[s] = llt.solve(Matrix::Identity(l.rows(), l.cols()));
  }
  out.value = -t * logdet;
  out.gradient = -t * param_.coordinates(inv);
  if (with_hessian) out.hessian = t * param_.congruence_hessian(inv);
  return out;
}

std::pair<RealVector, RealMatrix> fit_gradient_hessian(const ReconstructionProblem& problem,
                                                       const RealVector& x) {
  return problem.fit_gradient_hessian(x);
}

class FitBarrierObjective final : public BarrierObjective {
 public:
  FitBarrierObjective(const ReconstructionProblem& problem, double t) : problem_(problem), t_(t) {}

  int dimension() const override { return problem_.dimension(); }

  Evaluation evaluate(const RealVector& x, bool with_hessian) const override {
    const auto barrier = problem_.barrier(x, t_, with_hessian);
    Evaluation ev;
    ev.value = problem_.fit_value(x) + barrier.value;
    if (with_hessian) {
      auto [g, h] = problem_.fit_gradient_hessian(x);
      ev.gradient = g + barrier.gradient;
      ev.hessian = h + barrier.hessian;
    } else {
      ev.gradient = problem_.fit_gradient(x) + barrier.gradient;
    }
    return ev;
  }

  LineProbe probe(const RealVector& x, const RealVector& d) const override {
    const auto& param = problem_.parametrization();
    const SpinEnsemble rho = param.state(x);
    const BlockFactor factor = factor_blocks(rho);
    const std::vector<Matrix> dir = param.direction(d);

    // log det(rho + s D) - log det(rho) = sum log(1 + s mu), mu = eig(L^-1 D L^-H)
    std::vector<double> mu;
    LineProbe probe;
    for (std::size_t s = 0; s < dir.size(); ++s) {
      const auto l = factor.llt[s].matrixL();
      const Matrix y = l.solve(dir[s]);
      Matrix a = l.solve(Matrix(y.adjoint()));
      a = (a + a.adjoint()) * 0.5;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double m = eig.eigenvalues()(i);
        mu.push_back(m);
        if (m < 0.0) probe.max_step = std::min(probe.max_step, -1.0 / m);
      }
    }

    const RealVector p = problem_.probabilities(x);
    const RealVector q = problem_.overlaps() * d;
    const RealVector f = problem_.frequencies();
    const FitPrinciple principle = problem_.spec().principle;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const bool needs_positive = principle == FitPrinciple::FreeLeastSquares ||
                                  ((principle == FitPrinciple::MaxLik ||
                                    principle == FitPrinciple::HedgedMaxLik) &&
                                   f(i) > 0.0);
      if (needs_positive && q(i) < 0.0) probe.max_step = std::min(probe.max_step, -p(i) / q(i));
    }

    RealVector w;
    if (principle == FitPrinciple::LeastSquares) w = problem_.spec().ls_weights;
    const double t = t_;
    probe.delta = [=, mu = std::move(mu)](double s) {
      double barrier = 0.0;
      for (double m : mu) {
        const double arg = s * m;
        if (arg <= -1.0) return std::numeric_limits<double>::infinity();
        barrier -= std::log1p(arg);
      }
      double fit = 0.0;
      switch (principle) {
        case FitPrinciple::MaxLik:
        case FitPrinciple::HedgedMaxLik:
          for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (f(i) == 0.0) continue;
            const double ratio = s * q(i) / p(i);
            if (ratio <= -1.0) return std::numeric_limits<double>::infinity();
            fit -= f(i) * std::log1p(ratio);
          }
          break;
        case FitPrinciple::LeastSquares:
          for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double r = f(i) - p(i);
            fit += w(i) * s * q(i) * (s * q(i) - 2.0 * r);
          }
          break;
        case FitPrinciple::FreeLeastSquares:
          for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double pn = p(i) + s * q(i);
            if (!(pn > 0.0)) return std::numeric_limits<double>::infinity();
            fit += s * q(i) * (1.0 - f(i) * f(i) / (p(i) * pn));
          }
          break;
      }
      return fit + t * barrier;
    };
    return probe;
  }

 private:
  const ReconstructionProblem& problem_;
  double t_;
};

std::unique_ptr<BarrierObjective> ReconstructionProblem::objective(double t) const {
  return std::make_unique<FitBarrierObjective>(*this, t);
}

// ---------------------------------------------------------------------------
// Outer loop

namespace {

SpinEnsemble hermitize(SpinEnsemble e) {
  for (auto& b : e.blocks) b = (b + b.adjoint()) * 0.5;
  return e;
}

}  // namespace

ReconstructionResult reconstruct(const ReconstructionProblem& problem, const SolverConfig& config,
                                 const ReconstructionCallback& callback) {
  config.validate();
  const auto& spec = problem.spec();
  const bool hedged = spec.principle == FitPrinciple::HedgedMaxLik;
  const double t_end = hedged ? spec.beta : config.t_min;

  ReconstructionResult result(problem.parametrization().layout());
  RealVector x = RealVector::Zero(problem.dimension());
  result.converged = true;

  int stage = 0;
  double t = std::max(config.t0, hedged ? t_end : 0.0);
  int total = 0;
  for (;;) {
    const auto obj = problem.objective(t);
    IterateCallback cb;
    if (callback) {
      cb = [&](int, const RealVector& xi, double, double) { callback(t, total + 1, xi); ++total; };
    }
    const int before = total;
    NewtonOutcome outcome = newton_minimize(*obj, x, config.newton, cb);
    total = before + outcome.iterations;
    x = outcome.x;

    StageRecord rec;
    rec.t = t;
    rec.iterations = outcome.iterations;
    rec.objective_value = outcome.value;
    rec.fit_value = problem.fit_value(x);
    if (hedged) rec.fit_value += problem.barrier(x, spec.beta, false).value;
    rec.grad_norm = outcome.grad_norm;
    rec.converged = outcome.converged;
    rec.message = outcome.message;
    rec.x = x;
    result.trace.push_back(rec);
    result.final_t = t;
    if (!outcome.converged) {
      result.converged = false;
      if (config.abort_on_stage_failure) break;
    }

    if (t <= t_end * (1.0 + 1e-12)) break;
    ++stage;
    t = config.t0 / std::pow(config.t_reduce, stage);
    if (t < t_end * (1.0 + 1e-9)) t = t_end;
  }

  result.x = x;
  result.total_iterations = total;
  result.estimate = hermitize(problem.parametrization().state(x));
  result.fit_value = result.trace.back().fit_value;
  result.gap_bound = result.final_t * problem.parametrization().layout().compressed_dim();
  return result;
}

ReconstructionResult reconstruct(const Dataset& data, const FitSpec& spec, const SolverConfig& config,
                                 const ReconstructionCallback& callback) {
  const ReconstructionProblem problem(data, spec);
  return reconstruct(problem, config, callback);
}

KktReport kkt_certificate(const ReconstructionProblem& problem, const RealVector& x, double t) {
  const auto& param = problem.parametrization();
  const SpinEnsemble rho = param.state(x);
  const BlockFactor factor = factor_blocks(rho);
  std::vector<Matrix> multiplier(rho.blocks.size());
  KktReport rep;
  rep.min_multiplier_eig = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < rho.blocks.size(); ++s) {
    const Eigen::Index n = rho.blocks[s].rows();
    multiplier[s] = t * factor.llt[s].solve(Matrix::Identity(n, n));
    rep.duality_gap += (multiplier[s] * rho.blocks[s]).trace().real();
    rep.min_multiplier_eig = std::min(rep.min_multiplier_eig, min_eigenvalue(multiplier[s]));
  }
  const RealVector grad = problem.fit_gradient(x);
  const RealVector lambda_coords = param.coordinates(multiplier);
  rep.max_residual = (grad - lambda_coords).cwiseAbs().maxCoeff();
  rep.grad_inf_norm = grad.cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace pitomo
