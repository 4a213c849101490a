#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "pitomo/povm.hpp"
#include "support.hpp"

using namespace pitomo;
using pitomo::testing::max_abs;

namespace {

Vector3 rodrigues(const Vector3& v, const Vector3& axis, double angle) {
  return v * std::cos(angle) + axis.cross(v) * std::sin(angle) + axis * axis.dot(v) * (1.0 - std::cos(angle));
}

// Full operator of the PI element sum_j M_{k,j} (x) 1_{K_j}.
Matrix expand_element(const MeasurementBlockSet& m, int k) {
  const SpinSectorLayout& l = m.layout();
  SpinEnsemble e(l);
  for (int s = 0; s < l.num_sectors(); ++s) {
    if (m.present(k, s)) e.blocks[s] = m.block(k, s) * static_cast<double>(l.multiplicity(s));
  }
  return full::expand_full(e);
}

// [(a.sigma)^w (x) 1]_PI by averaging over all qubit permutations.
Matrix symmetrized_power(int n, const Vector3& axis, int w) {
  const Matrix a = full::axis_power_operator(n, axis, w);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix acc = Matrix::Zero(a.rows(), a.cols());
  int count = 0;
  do {
    const Matrix v = full::permutation_operator(n, perm);
    acc += v * a * v.adjoint();
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_SUITE("povm") {

TEST_CASE("settings") {
  CHECK_THROWS_AS(Setting(Vector3(1.0, 1.0, 0.0)), std::invalid_argument);
  const Setting s = Setting::normalized(Vector3(0.0, 3.0, 4.0));
  CHECK(std::abs(s.axis.norm() - 1.0) < 1e-15);
  CHECK(std::abs(s.axis.y() - 0.6) < 1e-15);
  const auto std3 = standard_settings();
  REQUIRE(std3.size() == 3);
  CHECK(std3[2].axis == Vector3::UnitZ());
}

TEST_CASE("rotation parameters") {
  RotationParams r = rotation_params(Setting(Vector3::UnitZ()));
  CHECK(r.theta == 0.0);
  CHECK(r.axis == Vector3::UnitX());
  r = rotation_params(Setting(Vector3::UnitX()));
  CHECK(std::abs(r.theta - M_PI / 2) < 1e-15);
  CHECK((r.axis - Vector3::UnitY()).norm() < 1e-15);
  r = rotation_params(Setting(-Vector3::UnitZ()));
  CHECK(std::abs(r.theta - M_PI) < 1e-15);
  CHECK(r.axis == Vector3::UnitX());

  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Setting a(rng.unit_vector());
    const RotationParams p = rotation_params(a);
    CHECK((rodrigues(Vector3::UnitZ(), p.axis, p.theta) - a.axis).norm() < 1e-12);
  }
}

TEST_CASE("standard blocks") {
  const MeasurementBlockSet two = standard_blocks(2);
  // k counts +1 answers, so outcome k sits at m = k - N/2.
  CHECK(two.block(0, 1)(2, 2).real() == 1.0);
  CHECK(two.block(1, 1)(1, 1).real() == 1.0);
  CHECK(two.block(2, 1)(0, 0).real() == 1.0);
  CHECK(std::abs(two.block(0, 1).sum() - Complex(1.0)) == 0.0);
  CHECK_FALSE(two.present(0, 0));
  CHECK_FALSE(two.present(2, 0));
  REQUIRE(two.present(1, 0));
  CHECK(two.block(1, 0)(0, 0).real() == 1.0);
  CHECK_THROWS_AS(two.block(0, 0), std::out_of_range);

  const MeasurementBlockSet three = standard_blocks(3);
  CHECK_FALSE(three.present(0, 0));
  CHECK(three.present(1, 0));
  CHECK(three.present(2, 0));
  CHECK_FALSE(three.present(3, 0));
  CHECK(three.block(1, 0)(1, 1).real() == 1.0);  // m = -1/2
  CHECK(three.block(2, 0)(0, 0).real() == 1.0);  // m = +1/2

  const MeasurementBlockSet z = rotated_blocks(5, Setting(Vector3::UnitZ()));
  const MeasurementBlockSet s = standard_blocks(5);
  for (int k = 0; k <= 5; ++k)
    for (int sec = 0; sec < s.layout().num_sectors(); ++sec) {
      REQUIRE(z.present(k, sec) == s.present(k, sec));
      if (s.present(k, sec)) CHECK(max_abs(Matrix(z.block(k, sec) - s.block(k, sec))) <= 1e-15);
    }
}

TEST_CASE("single qubit along x") {
  const MeasurementBlockSet m = rotated_blocks(1, Setting(Vector3::UnitX()));
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK(max_abs(Matrix(m.block(1, 0) - plus)) <= 1e-15);
  CHECK(max_abs(Matrix(m.block(0, 0) - (Matrix::Identity(2, 2) - plus))) <= 1e-15);
}

TEST_CASE("rotated blocks match the permutation-sum POVM") {
  Rng rng(41);
  for (int n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      const Setting a(rng.unit_vector());
      const MeasurementBlockSet m = rotated_blocks(n, a);
      const std::vector<Matrix> oracle = full::coarse_grained_povm(n, a.axis);
      for (int k = 0; k <= n; ++k) CHECK(max_abs(Matrix(expand_element(m, k) - oracle[k])) <= 1e-9);
    }
  }
}

TEST_CASE("completeness and orthogonality") {
  Rng rng(43);
  const int sizes[] = {1, 2, 3, 5, 8, 12, 16, 20};
  int done = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = sizes[trial % 8];
    const MeasurementBlockSet m = rotated_blocks(n, Setting(rng.unit_vector()));
    const SpinSectorLayout& l = m.layout();
    for (int s = 0; s < l.num_sectors(); ++s) {
      const int d = l.block_dim(s);
      Matrix sum = Matrix::Zero(d, d);
      for (int k = 0; k <= n; ++k) {
        if (!m.present(k, s)) continue;
        const Matrix& mk = m.block(k, s);
        sum += mk;
        CHECK(testing::max_abs(Matrix(mk - mk.adjoint())) <= 1e-12);
        CHECK(min_eigenvalue(mk) >= -1e-10);
        for (int k2 = 0; k2 <= n; ++k2) {
          if (!m.present(k2, s)) continue;
          const Matrix prod = mk * m.block(k2, s);
          const Matrix expect = k == k2 ? mk : Matrix::Zero(d, d);
          CHECK(max_abs(Matrix(prod - expect)) <= 1e-10);
        }
      }
      CHECK(max_abs(Matrix(sum - Matrix::Identity(d, d))) <= 1e-10);
    }
    ++done;
  }
  CHECK(done == 20);
}

TEST_CASE("unitary covariance") {
  Rng rng(47);
  for (int n : {2, 3, 6}) {
    const SpinSectorLayout l(n);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector3 a = rng.unit_vector();
      const Vector3 axis = rng.unit_vector();
      const double angle = 2.0 * M_PI * rng.uniform();
      const MeasurementBlockSet ma = rotated_blocks(n, Setting(a));
      const MeasurementBlockSet mb = rotated_blocks(n, Setting::normalized(rodrigues(a, axis, angle)));
      for (int s = 0; s < l.num_sectors(); ++s) {
        const SpinOperators ops = spin_operators(l.two_j(s));
        const Matrix gen = axis.x() * ops.s_x + axis.y() * ops.s_y + axis.z() * ops.s_z;
        const Matrix w = hermitian_expm(gen, angle);
        for (int k = 0; k <= n; ++k) {
          if (!ma.present(k, s)) continue;
          CHECK(max_abs(Matrix(w * ma.block(k, s) * w.adjoint() - mb.block(k, s))) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("probability examples") {
  Rng rng(53);
  for (int n = 1; n <= 10; ++n) {
    const SpinSectorLayout l(n);
    const RealVector p = probabilities(SpinEnsemble::maximally_mixed(l), rotated_blocks(n, Setting(rng.unit_vector())));
    for (int k = 0; k <= n; ++k) CHECK(std::abs(p(k) - binomial(n, k) / std::pow(2.0, n)) <= 1e-12);

    const RealVector g = probabilities(ghz_ensemble(n), standard_blocks(n));
    CHECK(std::abs(g(0) - 0.5) <= 1e-15);
    CHECK(std::abs(g(n) - 0.5) <= 1e-15);
    CHECK(std::abs(g.sum() - 1.0) <= 1e-15);

    for (int k = 0; k <= n; ++k) {
      const RealVector d = probabilities(dicke_ensemble(n, k), standard_blocks(n));
      CHECK(d(n - k) == 1.0);
      CHECK(d.sum() == 1.0);
    }
  }
}

TEST_CASE("probabilities agree with the full space") {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    const SpinSectorLayout l(n);
    const auto mode = trial % 3 == 0 ? PurityMode::HaarPure : PurityMode::HilbertSchmidtMixed;
    const SpinEnsemble e = random_pi_state(l, mode, rng);
    const Setting a(rng.unit_vector());
    const RealVector p = probabilities(e, rotated_blocks(n, a));
    const Matrix rho = full::expand_full(e);
    const auto povm = full::coarse_grained_povm(n, a.axis);
    for (int k = 0; k <= n; ++k) CHECK(std::abs(p(k) - (rho * povm[k]).trace().real()) <= 1e-10);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-10);
  }
}

TEST_CASE("probabilities reject clearly negative values") {
  const SpinSectorLayout l(2);
  SpinEnsemble e = SpinEnsemble::zeros(l);
  e.blocks[1](2, 2) = -1e-12;
  e.blocks[1](0, 0) = 1.0 + 1e-12;
  const RealVector p = probabilities(e, standard_blocks(2));
  CHECK(p(0) == 0.0);
  e.blocks[1](2, 2) = -1e-6;
  CHECK_THROWS_AS(probabilities(e, standard_blocks(2)), std::domain_error);
  CHECK_THROWS(probabilities(e, standard_blocks(3)));
}

TEST_CASE("moment coefficients") {
  for (int n = 1; n <= 12; ++n) {
    const RealVector k0 = moment_coefficients(n, 0);
    for (int k = 0; k <= n; ++k) CHECK(k0(k) == 1.0);
    const RealVector k1 = moment_coefficients(n, 1);
    for (int k = 0; k <= n; ++k) CHECK(std::abs(k1(k) - (2.0 * k - n) / n) <= 1e-15);
    const RealVector kn = moment_coefficients(n, n);
    for (int k = 0; k <= n; ++k) CHECK(kn(k) == ((n - k) % 2 ? -1.0 : 1.0));
  }
  CHECK_THROWS(moment_coefficients(3, 4));
  CHECK_THROWS(moment_coefficients(3, -1));
}

TEST_CASE("moments and variances against the full space") {
  Rng rng(61);
  for (int n = 1; n <= 5; ++n) {
    const SpinSectorLayout l(n);
    for (int trial = 0; trial < 3; ++trial) {
      const SpinEnsemble e = random_pi_state(l, PurityMode::HilbertSchmidtMixed, rng);
      const Matrix rho = full::expand_full(e);
      const Setting a(rng.unit_vector());
      const RealVector p = probabilities(e, rotated_blocks(n, a));
      for (int w = 0; w <= n; ++w) {
        const RealVector kc = moment_coefficients(n, w);
        const double mean = kc.dot(p);
        CHECK(std::abs(mean - (rho * full::axis_power_operator(n, a.axis, w)).trace().real()) <= 1e-10);
        const Matrix sym = symmetrized_power(n, a.axis, w);
        const double m1 = (rho * sym).trace().real();
        const double m2 = (rho * sym * sym).trace().real();
        const double var = kc.array().square().matrix().dot(p) - mean * mean;
        CHECK(std::abs(var - (m2 - m1 * m1)) <= 1e-10);
      }
    }
  }
}

}  // TEST_SUITE
