#include "pitomo/povm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace pitomo {

Setting::Setting(const Vector3& unit_axis) : axis(unit_axis) {
  if (!unit_axis.allFinite() || std::abs(unit_axis.norm() - 1.0) > kAxisNormTol) {
    std::ostringstream msg;
    msg << "setting axis must be a unit vector, got norm " << unit_axis.norm();
    throw std::invalid_argument(msg.str());
  }
}

Setting Setting::normalized(const Vector3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize zero axis");
  Setting s;
  s.axis = v / n;
  return s;
}

std::vector<Setting> standard_settings() {
  return {Setting(Vector3::UnitX()), Setting(Vector3::UnitY()), Setting(Vector3::UnitZ())};
}

RotationParams rotation_params(const Setting& setting) {
  const Vector3& a = setting.axis;
  const Vector3 cross = Vector3::UnitZ().cross(a);
  const double sin_theta = cross.norm();
  RotationParams r;
  r.theta = std::acos(std::clamp(a.z(), -1.0, 1.0));
  if (sin_theta < 1e-15) {
    r.axis = Vector3::UnitX();
    r.theta = a.z() > 0 ? 0.0 : M_PI;
  } else {
    r.axis = cross / sin_theta;
  }
  return r;
}

MeasurementBlockSet::MeasurementBlockSet(Setting setting, SpinSectorLayout layout,
                                         std::vector<std::vector<Matrix>> blocks)
    : setting_(std::move(setting)), layout_(std::move(layout)), blocks_(std::move(blocks)) {}

bool MeasurementBlockSet::present(int k, int sector) const {
  const int two_m = 2 * k - layout_.n_qubits();
  return std::abs(two_m) <= layout_.two_j(sector);
}

const Matrix& MeasurementBlockSet::block(int k, int sector) const {
  if (!present(k, sector)) {
    throw std::out_of_range("outcome " + std::to_string(k) + " has no block in sector two_j=" +
                            std::to_string(layout_.two_j(sector)));
  }
  return blocks_.at(k).at(sector);
}

namespace {

MeasurementBlockSet build_blocks(int n_qubits, const Setting& setting, bool rotate) {
  SpinSectorLayout layout(n_qubits);
  std::vector<std::vector<Matrix>> blocks(n_qubits + 1,
                                          std::vector<Matrix>(layout.num_sectors()));
  const RotationParams rot = rotation_params(setting);
  for (int s = 0; s < layout.num_sectors(); ++s) {
    const int two_j = layout.two_j(s);
    const int dim = two_j + 1;
    Matrix w = Matrix::Identity(dim, dim);
    if (rotate && rot.theta != 0.0) {
      const SpinOperators ops = spin_operators(two_j);
      const Matrix generator =
          rot.axis.x() * ops.s_x + rot.axis.y() * ops.s_y + rot.axis.z() * ops.s_z;
      w = hermitian_expm(generator, rot.theta);
    }
    for (int k = 0; k <= n_qubits; ++k) {
      const int idx = layout.index_of_m(s, 2 * k - n_qubits);
      if (idx < 0) continue;
      const Eigen::VectorXcd col = w.col(idx);
      blocks[k][s] = col * col.adjoint();
    }
  }
  return MeasurementBlockSet(setting, layout, std::move(blocks));
}

}  // namespace

MeasurementBlockSet standard_blocks(int n_qubits) {
  return build_blocks(n_qubits, Setting(Vector3::UnitZ()), false);
}

MeasurementBlockSet rotated_blocks(int n_qubits, const Setting& setting) {
  return build_blocks(n_qubits, setting, true);
}

std::vector<MeasurementBlockSet> rotated_blocks(int n_qubits, const std::vector<Setting>& settings) {
  std::vector<MeasurementBlockSet> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(rotated_blocks(n_qubits, s));
  return out;
}

RealVector probabilities(const SpinEnsemble& state, const MeasurementBlockSet& blocks) {
  if (state.layout != blocks.layout()) {
    throw std::invalid_argument("probabilities: qubit number mismatch");
  }
  const auto& layout = blocks.layout();
  RealVector p = RealVector::Zero(blocks.num_outcomes());
  for (int k = 0; k < blocks.num_outcomes(); ++k) {
    double acc = 0.0;
    for (int s = 0; s < layout.num_sectors(); ++s) {
      if (!blocks.present(k, s)) continue;
      acc += (state.blocks[s].cwiseProduct(blocks.block(k, s).transpose())).sum().real();
    }
    if (acc < 0.0) {
      if (acc < -kPsdTol) {
        std::ostringstream msg;
        msg << "negative outcome probability " << acc << " for k=" << k;
        throw std::domain_error(msg.str());
      }
      acc = 0.0;
    }
    p(k) = acc;
  }
  return p;
}

RealVector moment_coefficients(int n_qubits, int weight) {
  if (n_qubits < 1) throw std::invalid_argument("moment_coefficients: N must be positive");
  if (weight < 0 || weight > n_qubits) {
    throw std::invalid_argument("moment_coefficients: weight out of range");
  }
  const double denom = static_cast<double>(binomial(n_qubits, weight));
  RealVector coeffs(n_qubits + 1);
  for (int k = 0; k <= n_qubits; ++k) {
    __int128 numer = 0;
    for (int l = 0; l <= weight; ++l) {
      const __int128 term = static_cast<__int128>(binomial(n_qubits - k, l)) *
                            static_cast<__int128>(binomial(k, weight - l));
      numer += (l % 2 == 0) ? term : -term;
    }
    coeffs(k) = static_cast<double>(numer) / denom;
  }
  return coeffs;
}

}  // namespace pitomo
