#include <doctest.h>

#include "pitomo/sim.hpp"
#include "support.hpp"

using namespace pitomo;

namespace {

Vector3 rodrigues(const Vector3& v, const Vector3& axis, double angle) {
  return v * std::cos(angle) + axis.cross(v) * std::sin(angle) + axis * axis.dot(v) * (1.0 - std::cos(angle));
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("generator") {
  Rng a(42), b(42);
  std::mt19937_64 ref(42);
  for (int i = 0; i < 5; ++i) CHECK(a.next() == ref());
  double sum = 0.0, sq = 0.0, gsum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const double u = b.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = b.normal();
    sum += z;
    sq += z * z;
    gsum += b.gamma(0.5);
    CHECK(std::abs(b.unit_vector().norm() - 1.0) <= 1e-14);
  }
  CHECK(std::abs(sum / draws) < 4.0 / std::sqrt(draws));
  CHECK(std::abs(sq / draws - 1.0) < 4.0 * std::sqrt(2.0 / draws));
  CHECK(std::abs(gsum / draws - 0.5) < 4.0 * std::sqrt(0.5 / draws));
  CHECK_THROWS(b.gamma(0.0));
}

TEST_CASE("random states") {
  for (int n = 1; n <= 9; ++n) {
    const SpinSectorLayout l(n);
    const SpinEnsemble pure = random_pi_state(l, PurityMode::HaarPure, 1000 + n);
    CHECK_NOTHROW(pure.validate());
    for (int s = 0; s < l.num_sectors(); ++s) {
      const double p = pure.weight(s);
      if (p < 1e-12) continue;
      CHECK(std::abs((pure.blocks[s] * pure.blocks[s]).trace().real() / (p * p) - 1.0) <= 1e-12);
    }
    const SpinEnsemble mixed = random_pi_state(l, PurityMode::HilbertSchmidtMixed, 2000 + n);
    CHECK_NOTHROW(mixed.validate());
    CHECK(std::abs(mixed.total_trace() - 1.0) <= 1e-15);
  }
  const SpinSectorLayout l(6);
  const SpinEnsemble a = random_pi_state(l, PurityMode::HilbertSchmidtMixed, 77);
  const SpinEnsemble b = random_pi_state(l, PurityMode::HilbertSchmidtMixed, 77);
  for (int s = 0; s < l.num_sectors(); ++s) CHECK((a.blocks[s].array() == b.blocks[s].array()).all());
  const SpinEnsemble c = random_pi_state(l, PurityMode::HilbertSchmidtMixed, 78);
  CHECK(trace_distance(a, c) > 1e-3);
}

TEST_CASE("Dirichlet weights") {
  const SpinSectorLayout l(7);  // four sectors
  const int sectors = l.num_sectors();
  const int draws = 10000;
  Rng rng(3);
  RealVector mean = RealVector::Zero(sectors);
  for (int i = 0; i < draws; ++i) {
    const SpinEnsemble e = random_pi_state(l, PurityMode::HaarPure, rng);
    double total = 0.0;
    for (int s = 0; s < sectors; ++s) {
      mean(s) += e.weight(s) / draws;
      total += e.weight(s);
    }
    CHECK(std::abs(total - 1.0) <= 1e-14);
  }
  const double alpha = 0.5, a0 = alpha * sectors;
  const double sd = std::sqrt(alpha * (a0 - alpha) / (a0 * a0 * (a0 + 1.0)) / draws);
  for (int s = 0; s < sectors; ++s) CHECK(std::abs(mean(s) - 1.0 / sectors) <= 3.0 * sd);
}

TEST_CASE("settings") {
  CHECK(determined_setting_count(1) == 3);
  CHECK(determined_setting_count(4) == 15);
  CHECK(determined_setting_count(12) == 91);
  Rng rng(5);
  const auto s = random_settings(30, rng);
  CHECK(s.size() == 30);
  for (const auto& x : s) CHECK(std::abs(x.axis.norm() - 1.0) <= 1e-12);
}

TEST_CASE("exact datasets") {
  const auto settings = standard_settings();
  const Dataset m = exact_dataset(SpinEnsemble::maximally_mixed(SpinSectorLayout(4)), settings);
  CHECK(m.exact);
  CHECK(m.records.size() == 3);
  CHECK(m.records[0].repetitions == kNominalRepetitions);
  for (int k = 0; k <= 4; ++k) CHECK(std::abs(m.records[1].frequencies()(k) - binomial(4, k) / 16.0) <= 1e-15);
  CHECK_NOTHROW(m.validate());

  const Dataset g = exact_dataset(ghz_ensemble(5), settings);
  CHECK(std::abs(g.records[2].frequencies()(0) - 0.5) <= 1e-15);
  CHECK(std::abs(g.records[2].frequencies()(5) - 0.5) <= 1e-15);

  const Dataset d = exact_dataset(dicke_ensemble(5, 2), settings);
  CHECK(d.records[2].frequencies()(3) == 1.0);
  CHECK(d.stacked_frequencies().size() == 18);
}

TEST_CASE("sampled datasets") {
  const auto settings = standard_settings();
  const Dataset d = sample_dataset(dicke_ensemble(6, 1), settings, 500, 1);
  CHECK_FALSE(d.exact);
  CHECK(d.records[2].counts(5) == 500);
  CHECK(d.records[2].counts.sum() == 500);

  const Dataset small = sample_dataset(ghz_ensemble(3), settings, 200, 2);
  for (const auto& r : small.records) {
    CHECK(r.counts.sum() == 200);
    CHECK(r.repetitions == 200);
    for (int k = 0; k <= 3; ++k) CHECK(r.counts(k) == std::round(r.counts(k)));
  }
  CHECK_NOTHROW(small.validate());

  const Dataset again = sample_dataset(ghz_ensemble(3), settings, 200, 2);
  CHECK((again.stacked_frequencies().array() == small.stacked_frequencies().array()).all());
}

TEST_CASE("frequencies concentrate") {
  const int n = 6;
  const SpinSectorLayout l(n);
  const SpinEnsemble truth = random_pi_state(l, PurityMode::HilbertSchmidtMixed, 4);
  Rng rng(44);
  const auto settings = random_settings(5, rng);
  const auto blocks = rotated_blocks(n, settings);
  const std::int64_t reps = 2000;
  const double bound = 5.0 * std::sqrt(std::log(2.0 * (n + 1)) / (2.0 * reps));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = sample_dataset(truth, settings, reps, seed);
    for (std::size_t a = 0; a < settings.size(); ++a) {
      const RealVector p = probabilities(truth, blocks[a]);
      CHECK((d.records[a].frequencies() - p).cwiseAbs().maxCoeff() <= bound);
    }
  }
}

TEST_CASE("sampling is unbiased") {
  RealVector p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  Rng rng(8);
  const int draws = 10000;
  const std::int64_t trials = 20;
  RealVector mean = RealVector::Zero(4);
  for (int i = 0; i < draws; ++i) mean += sample_counts(p, trials, rng) / static_cast<double>(trials * draws);
  for (int k = 0; k < 4; ++k) {
    const double sd = std::sqrt(p(k) * (1.0 - p(k)) / static_cast<double>(trials * draws));
    CHECK(std::abs(mean(k) - p(k)) <= 4.0 * sd);
  }
  const RealVector scaled = sample_counts(2.0 * p, 100, rng);
  CHECK(scaled.sum() == 100);
}

TEST_CASE("Dicke mixture") {
  DickeMixtureParams plain;
  plain.theta = 0.0;
  plain.noise_weight = 0.0;
  const int n = 8;
  const SpinEnsemble d = dicke_mixture_state(n, plain, 1);
  const int top = d.layout.top_sector();
  CHECK(std::abs(d.weight(top) - 1.0) <= 1e-14);
  for (int k = 0; k <= n; ++k) {
    const double expect = binomial(n, k) * std::pow(0.6, k) * std::pow(0.4, n - k);
    CHECK(std::abs(d.blocks[top](k, k).real() - expect) <= 1e-14);
  }
  CHECK(testing::max_abs(Matrix(d.blocks[top] - Matrix(d.blocks[top].diagonal().asDiagonal()))) <= 1e-15);

  const SpinEnsemble big = dicke_mixture_state(14, DickeMixtureParams{}, 3);
  CHECK_NOTHROW(big.validate());
  CHECK(big.layout.two_j(big.layout.top_sector()) == 14);

  DickeMixtureParams unrotated;
  unrotated.theta = 0.0;
  const SpinEnsemble a = dicke_mixture_state(6, DickeMixtureParams{}, 9);
  const SpinEnsemble b = dicke_mixture_state(6, unrotated, 9);
  for (int s = 0; s < a.layout.num_sectors(); ++s) CHECK(std::abs(a.weight(s) - b.weight(s)) <= 1e-14);
  CHECK(trace_distance(a, b) > 1e-3);

  DickeMixtureParams bad;
  bad.noise_weight = 1.5;
  CHECK_THROWS(dicke_mixture_state(4, bad, 1));
  bad = DickeMixtureParams{};
  bad.p_asym = -0.1;
  CHECK_THROWS(dicke_mixture_state(4, bad, 1));
}

TEST_CASE("collective rotations are covariant") {
  Rng rng(12);
  for (int n = 1; n <= 5; ++n) {
    const SpinSectorLayout l(n);
    const SpinEnsemble rho = random_pi_state(l, PurityMode::HilbertSchmidtMixed, rng);
    const Vector3 axis = rng.unit_vector();
    const double angle = 2.0 * M_PI * rng.uniform();
    SpinEnsemble rotated(l);
    for (int s = 0; s < l.num_sectors(); ++s) {
      const SpinOperators ops = spin_operators(l.two_j(s));
      const Matrix w = hermitian_expm(axis.x() * ops.s_x + axis.y() * ops.s_y + axis.z() * ops.s_z, angle);
      rotated.blocks[s] = w * rho.blocks[s] * w.adjoint();
    }
    for (int trial = 0; trial < 4; ++trial) {
      const Vector3 a = rng.unit_vector();
      const RealVector lhs = probabilities(rotated, rotated_blocks(n, Setting(a)));
      const RealVector rhs = probabilities(rho, rotated_blocks(n, Setting::normalized(rodrigues(a, axis, -angle))));
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("dataset validation") {
  Dataset d = sample_dataset(ghz_ensemble(2), standard_settings(), 100, 1);
  CHECK_NOTHROW(d.validate());
  Dataset bad = d;
  bad.records[0].counts(0) += 0.5;
  bad.records[0].counts(1) -= 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = d;
  bad.records[0].counts(0) = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = d;
  bad.records[1].counts = RealVector::Zero(2);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = d;
  bad.records[2].repetitions = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  Dataset e = exact_dataset(ghz_ensemble(2), standard_settings());
  e.records[0].counts(0) *= 1.0 + 1e-12;
  CHECK_NOTHROW(e.validate());
  e.records[0].counts(0) *= 1.1;
  CHECK_THROWS(e.validate());
}

}  // TEST_SUITE
