#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eraser/model.hpp"

#include <numbers>
#include <random>

using namespace eraser;

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

EraserParams bell_params() {
  EraserParams p;
  p.a = p.b = kInvSqrt2;
  p.h = 0.0;
  p.v = 1.0;
  p.gamma = 1.0;
  return p;
}

ScreenGeometry default_geometry() {
  ScreenGeometry g;
  g.x_grid = linear_grid(-2.51e-5, 2.51e-5, 2001);
  return g;
}

EraserParams random_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  EraserParams p;
  const double ta = 0.2 + 0.6 * u(rng);  // keep both slits populated
  p.a = std::sqrt(ta) * std::polar(1.0, ang(rng));
  p.b = std::sqrt(1.0 - ta) * std::polar(1.0, ang(rng));
  const double th = u(rng);
  p.h = std::sqrt(th) * std::polar(1.0, ang(rng));
  p.v = std::sqrt(1.0 - th) * std::polar(1.0, ang(rng));
  p.gamma = u(rng);
  return p;
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_NOTHROW(bell_params().validate());
  EraserParams bad = bell_params();
  bad.a = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = bell_params();
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("joint state: Bell, dephased and product limits") {
  // gamma=1, h=0, v=1 is the maximally entangled state
  const auto bell = build_joint_state(bell_params());
  Vector4 psi;
  psi << kInvSqrt2, 0, 0, kInvSqrt2;
  CHECK((bell.mat() - Matrix4(psi * psi.adjoint())).lpNorm<Eigen::Infinity>() <
        1e-14);

  EraserParams dephased = bell_params();
  dephased.gamma = 0.0;
  const auto mix = build_joint_state(dephased);
  Matrix4 expected = Matrix4::Zero();
  expected.diagonal() << 0.5, 0, 0, 0.5;
  CHECK((mix.mat() - expected).lpNorm<Eigen::Infinity>() < 1e-14);

  // identical markers leave a pure product at full coherence; for
  // gamma < 1 the dephased branch still removes the slit coherence
  EraserParams prod = bell_params();
  prod.h = 1.0;
  prod.v = 0.0;
  const auto pure = build_joint_state(prod);
  Vector4 plus_h;
  plus_h << kInvSqrt2, 0, kInvSqrt2, 0;
  CHECK((pure.mat() - Matrix4(plus_h * plus_h.adjoint()))
            .lpNorm<Eigen::Infinity>() < 1e-14);
  prod.gamma = 0.3;
  const auto partial = build_joint_state(prod);
  CHECK(std::abs(partial.mat()(0, 2) - Complex(0.15)) < 1e-14);
  CHECK(std::real(partial.mat()(0, 0)) == doctest::Approx(0.5));
}

TEST_CASE("envelope values") {
  const ScreenGeometry g = default_geometry();
  CHECK(envelope(g, 0.0) == doctest::Approx(1.0));
  const double null_x = g.envelope_first_null();
  CHECK(envelope(g, null_x) == doctest::Approx(0.0).epsilon(1e-12));
  // sinc^2(pi/2) = (2/pi)^2
  const double expected = std::pow(2.0 / std::numbers::pi, 2);
  CHECK(envelope(g, 0.5 * null_x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(envelope(g, -0.3 * null_x) == doctest::Approx(envelope(g, 0.3 * null_x)));
}

TEST_CASE("phase difference values") {
  ScreenGeometry g = default_geometry();
  CHECK(phase_difference(g, 0.0) == doctest::Approx(0.0));
  CHECK(phase_difference(g, g.fringe_period()) ==
        doctest::Approx(2.0 * std::numbers::pi));
  g.slit_separation = 2.0 * g.slit_width;
  CHECK(phase_difference(g, 0.25 * g.fringe_period()) ==
        doctest::Approx(std::numbers::pi / 2.0));
  CHECK(phase_difference(g, -1e-6) == doctest::Approx(-phase_difference(g, 1e-6)));
}

TEST_CASE("waveplate unitary") {
  CHECK((waveplate_unitary(0.0) - pauli_z()).lpNorm<Eigen::Infinity>() < 1e-15);

  // theta = pi/8: |H> -> (|H>+|V>)/sqrt(2), |V> -> (|H>-|V>)/sqrt(2)
  const Matrix2 u = waveplate_unitary(std::numbers::pi / 8.0);
  Vector2 h_in, expected;
  h_in << 1, 0;
  expected << kInvSqrt2, kInvSqrt2;
  CHECK((u * h_in - expected).norm() < 1e-14);
  Vector2 v_in, expected_v;
  v_in << 0, 1;
  expected_v << kInvSqrt2, -kInvSqrt2;
  CHECK((u * v_in - expected_v).norm() < 1e-14);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const Matrix2 w = waveplate_unitary(ang(rng));
    CHECK((w * w.adjoint() - Matrix2::Identity()).lpNorm<Eigen::Infinity>() <
          1e-12);
  }
}

TEST_CASE("photon projectors") {
  Matrix2 hh = Matrix2::Zero();
  hh(0, 0) = 1.0;
  CHECK((photon_projector(PauliAxis::z, +1) - hh).lpNorm<Eigen::Infinity>() <
        1e-15);

  Matrix2 diag;
  diag << 0.5, 0.5, 0.5, 0.5;
  CHECK((photon_projector(PauliAxis::x, +1) - diag).lpNorm<Eigen::Infinity>() <
        1e-15);

  Matrix2 circ;
  circ << Complex(0.5, 0), Complex(0, -0.5), Complex(0, 0.5), Complex(0.5, 0);
  CHECK((photon_projector(PauliAxis::y, +1) - circ).lpNorm<Eigen::Infinity>() <
        1e-15);

  // the sigma_x pair is physically the pi/8 waveplate followed by the
  // sigma_z analyzer
  const Matrix2 u = waveplate_unitary(std::numbers::pi / 8.0);
  const Matrix2 realized =
      u.adjoint() * photon_projector(PauliAxis::z, +1) * u;
  CHECK((realized - photon_projector(PauliAxis::x, +1))
            .lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("conditioning on the photon") {
  const auto bell = build_joint_state(bell_params());

  const auto which_path =
      condition_on_photon(bell, photon_projector(PauliAxis::z, +1));
  CHECK(which_path.probability == doctest::Approx(0.5));
  Matrix2 ll = Matrix2::Zero();
  ll(0, 0) = 1.0;
  CHECK((which_path.rho_e.mat() - ll).lpNorm<Eigen::Infinity>() < 1e-14);

  const auto erased =
      condition_on_photon(bell, photon_projector(PauliAxis::x, +1));
  CHECK(erased.probability == doctest::Approx(0.5));
  Matrix2 plus;
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK((erased.rho_e.mat() - plus).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("conditioning with non-orthogonal markers") {
  // explicit 4-vector projection oracle: a=b=1/sqrt2, h=0.6, v=0.8,
  // P=|D><D| gives probability 0.74 and off-diagonal 0.7/1.48
  EraserParams p = bell_params();
  p.h = 0.6;
  p.v = 0.8;
  const auto rho = build_joint_state(p);
  const auto cs = condition_on_photon(rho, photon_projector(PauliAxis::x, +1));
  CHECK(cs.probability == doctest::Approx(0.74).epsilon(1e-12));
  CHECK(std::abs(cs.rho_e(0, 1) - Complex(0.7 / 1.48)) < 1e-12);
}

TEST_CASE("zero-probability branch is an error") {
  EraserParams p = bell_params();
  p.h = 1.0;
  p.v = 0.0;  // photon always |H>
  const auto rho = build_joint_state(p);
  CHECK_THROWS_AS(
      condition_on_photon(rho, photon_projector(PauliAxis::z, -1)),
      std::domain_error);
}

TEST_CASE("intensity patterns: flat, fringes, quarter-period shift") {
  const ScreenGeometry g = default_geometry();

  const auto flat = DensityMatrix2::validate(Matrix2(0.5 * Matrix2::Identity()));
  const auto pat_flat = intensity_pattern(flat, g);
  for (std::size_t i = 0; i < pat_flat.x.size(); ++i)
    CHECK(pat_flat.intensity[i] ==
          doctest::Approx(envelope(g, pat_flat.x[i])).epsilon(1e-12));

  Matrix2 plus;
  plus << 0.5, 0.5, 0.5, 0.5;
  const auto pure = DensityMatrix2::validate(plus);
  const auto pat = intensity_pattern(pure, g);
  for (std::size_t i = 0; i < pat.x.size(); ++i) {
    const double expected =
        envelope(g, pat.x[i]) * (1.0 + std::cos(phase_difference(g, pat.x[i])));
    CHECK(pat.intensity[i] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pat.intensity[i] >= -1e-12);
  }

  // rho_LR = i/2 turns cos into -sin (quarter-period shift)
  Matrix2 shifted;
  shifted << Complex(0.5, 0), Complex(0, 0.5), Complex(0, -0.5),
      Complex(0.5, 0);
  const auto pat_s =
      intensity_pattern(DensityMatrix2::validate(shifted), g);
  for (std::size_t i = 0; i < pat_s.x.size(); ++i) {
    const double expected =
        envelope(g, pat_s.x[i]) *
        (1.0 - std::sin(phase_difference(g, pat_s.x[i])));
    CHECK(pat_s.intensity[i] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("visibility: analytic limits") {
  const auto bell = build_joint_state(bell_params());
  const auto unconditioned = partial_trace(bell, Subsystem::photon);
  CHECK(fringe_visibility(unconditioned) == doctest::Approx(0.0));

  const auto erased =
      condition_on_photon(bell, photon_projector(PauliAxis::x, +1));
  CHECK(fringe_visibility(erased.rho_e) == doctest::Approx(1.0));
}

TEST_CASE("visibility: closed form gamma Re(h) with numeric cross-check") {
  EraserParams p = bell_params();
  p.gamma = 0.5;
  p.h = 0.6;
  p.v = 0.8;
  const auto rho = build_joint_state(p);
  const auto red = partial_trace(rho, Subsystem::photon);
  CHECK(fringe_visibility(red) == doctest::Approx(0.30).epsilon(1e-12));
  const ScreenGeometry g = default_geometry();
  CHECK(std::abs(fringe_visibility(red) - fringe_visibility_numeric(red, g)) <
        1e-9);
}

TEST_CASE("probability completeness and pattern consistency") {
  std::mt19937 rng(123);
  const ScreenGeometry g = default_geometry();
  for (int trial = 0; trial < 50; ++trial) {
    const EraserParams p = random_params(rng);
    const auto rho = build_joint_state(p);
    for (PauliAxis axis : {PauliAxis::x, PauliAxis::y, PauliAxis::z}) {
      const auto plus = condition_on_photon(rho, photon_projector(axis, +1));
      const auto minus = condition_on_photon(rho, photon_projector(axis, -1));
      CHECK(plus.probability + minus.probability ==
            doctest::Approx(1.0).epsilon(1e-12));

      // unconditioned pattern equals the probability-weighted branch sum
      const auto unc =
          intensity_pattern(partial_trace(rho, Subsystem::photon), g);
      const auto pat_p = intensity_pattern(plus.rho_e, g);
      const auto pat_m = intensity_pattern(minus.rho_e, g);
      for (std::size_t i = 0; i < unc.x.size(); i += 100) {
        const double mixed = plus.probability * pat_p.intensity[i] +
                             minus.probability * pat_m.intensity[i];
        CHECK(unc.intensity[i] == doctest::Approx(mixed).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("unconditioned visibility equals 2|a||b| gamma |h| over randoms") {
  std::mt19937 rng(321);
  for (int trial = 0; trial < 1000; ++trial) {
    const EraserParams p = random_params(rng);
    const auto red = partial_trace(build_joint_state(p), Subsystem::photon);
    const double expected = 2.0 * std::abs(p.a) * std::abs(p.b) * p.gamma *
                            std::abs(p.h);
    CHECK(fringe_visibility(red) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("conditioned visibility family gamma(h+v)/(1+hv)") {
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    EraserParams p;
    p.a = p.b = kInvSqrt2;
    const double h2 = u(rng);
    p.h = std::sqrt(h2);
    p.v = std::sqrt(1.0 - h2);
    p.gamma = u(rng);
    const auto rho = build_joint_state(p);
    const auto cond =
        condition_on_photon(rho, photon_projector(PauliAxis::x, +1));
    const double h = std::real(p.h), v = std::real(p.v);
    const double expected = p.gamma * (h + v) / (1.0 + h * v);
    CHECK(fringe_visibility(cond.rho_e) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("wavelength helper: 200 kV is close to 2.51 pm") {
  CHECK(wavelength_from_kv(200.0) == doctest::Approx(2.508e-12).epsilon(1e-3));
  CHECK_THROWS_AS(wavelength_from_kv(-1.0), std::invalid_argument);
}

TEST_CASE("geometry validation") {
  ScreenGeometry g = default_geometry();
  CHECK_NOTHROW(g.validate());
  g.slit_width = g.slit_separation * 2.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = default_geometry();
  g.x_grid[5] = g.x_grid[4];
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
