#include <crowdflow/observables.hpp>
#include <crowdflow/simulation.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace crowdflow;

namespace {

constexpr double kAspect = 0.04;

// Trapezoid: rise on [0, 2], flat on [2, 6], fall on [6, 8].
void trapezoid(std::vector<double>& t, std::vector<double>& m) {
  for (int i = 0; i <= 800; ++i) {
    const double s = i * 0.01;
    t.push_back(s);
    m.push_back(s < 2 ? s / 2 : s < 6 ? 1.0 : std::max(0.0, (8 - s) / 2));
  }
}

}  // namespace

TEST_CASE("egress time") {
  std::vector<double> t, g;
  for (int n = 0; n <= 150; ++n) {
    t.push_back(0.01 * n);
    g.push_back(n >= 100 ? 3.0 : 3.0 * n / 100.0);
  }
  CHECK(egress_time(t, g, 3.0) == doctest::Approx(1.0));
  CHECK(std::isinf(egress_time(t, g, 4.0)));
  CHECK(egress_time(t, g, 0.0) == 0.0);
  g[50] = 3.0 * (1 - 0.5 * kMassClosure);
  CHECK(egress_time(t, g, 3.0) == doctest::Approx(0.5));
}

TEST_CASE("chord uniformity index") {
  CHECK(delta_rho(0.7, 0.7, 1.3) == 0.0);
  CHECK(delta_rho(1.3, 0.0, 1.3) == doctest::Approx(1.0));
  CHECK(delta_rho(0.0, 1.3, 1.3) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(delta_rho(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("chord probe picks walls and mid-chord") {
  const TriMesh m = generate_mesh(DomainSpec::rectangle(kAspect), kAspect / 8);
  const ChordProbe probe(m, 0.5);
  CHECK(probe.x() == 0.5);
  Eigen::VectorXd lateral(m.num_elements()), uniform = Eigen::VectorXd::Constant(m.num_elements(), 0.4);
  for (int k = 0; k < m.num_elements(); ++k) lateral[k] = std::abs(m.centroid(k).y());
  CHECK(delta_rho(probe, uniform, 1.3) == doctest::Approx(0.0));
  // wall elements sit within one row of the wall, mid elements within one row of the axis
  CHECK(probe.rho_side(lateral) >= kAspect / 2 - kAspect / 8);
  CHECK(probe.rho_mid(lateral) <= kAspect / 8);
  CHECK(delta_rho(probe, lateral, 1.0) < 0);

  Eigen::VectorXd tilt(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k) tilt[k] = 1.0 + m.centroid(k).y();
  CHECK(probe.rho_side(tilt) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(probe.rho_mid(tilt) == doctest::Approx(1.0).epsilon(1e-12));
  const auto profile = probe.profile(tilt);
  REQUIRE(profile.size() == 64);
  CHECK(profile.front().first == doctest::Approx(-kAspect / 2 + kAspect / 128));
  for (std::size_t i = 1; i < profile.size(); ++i) {
    CHECK(profile[i].first > profile[i - 1].first);
    CHECK(profile[i].second >= profile[i - 1].second);
  }
  CHECK_THROWS_AS(ChordProbe(m, 1.5), std::invalid_argument);
}

TEST_CASE("chord probe follows curved walls") {
  const TriMesh m = generate_mesh(DomainSpec::curved(kAspect), kAspect / 8);
  const ChordProbe probe(m, 0.5);
  Eigen::VectorXd d(m.num_elements());
  // density equal to the distance from the arch centerline y = 0.05
  for (int k = 0; k < m.num_elements(); ++k) d[k] = std::abs(m.centroid(k).y() - 0.05);
  CHECK(probe.rho_mid(d) <= kAspect / 8);
  CHECK(probe.rho_side(d) >= kAspect / 2 - kAspect / 8);
}

TEST_CASE("smoothed rate and plateau detection") {
  std::vector<double> t, m;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    m.push_back(3.0 * t.back() + 1.0);
  }
  for (double r : smoothed_rate(t, m, 0.5)) CHECK(r == doctest::Approx(3.0));

  t.clear();
  m.clear();
  trapezoid(t, m);
  const auto w = detect_plateau(t, m, 0.02, 0.05);
  REQUIRE(w);
  CHECK(w->t0 == doctest::Approx(2.0).epsilon(0.02));
  CHECK(w->t1 == doctest::Approx(6.0).epsilon(0.02));
  CHECK(t[w->i0] == w->t0);
  CHECK(t[w->i1] == w->t1);
  const RegimeSummary r = classify_regimes(t, m);
  CHECK(r.ordered());

  // filling only: no leaving regime
  std::vector<double> rising(m.begin(), m.begin() + 500);
  std::vector<double> tr(t.begin(), t.begin() + 500);
  CHECK_FALSE(classify_regimes(tr, rising).ordered());
  // monotone ramp: no plateau
  std::vector<double> ramp;
  for (double s : t) ramp.push_back(s);
  CHECK_FALSE(detect_plateau(t, ramp));
}

TEST_CASE("probability and mass normalizations") {
  const TriMesh m = generate_mesh(DomainSpec::bottleneck(kAspect), kAspect / 4);
  Eigen::VectorXd d(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k) d[k] = 1500 * (1.0 + std::sin(7 * m.centroid(k).x()));
  const Eigen::VectorXd copy = d;
  const Eigen::VectorXd p = to_probability_density(m, d);
  CHECK(d == copy);
  CHECK(total_mass(m, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((to_probability_density(m, p) - p).cwiseAbs().maxCoeff() <= 1e-15 * p.maxCoeff());
  const Eigen::VectorXd back = to_mass_density(p, 1500.0) / 1500.0;
  CHECK((back - p).cwiseAbs().maxCoeff() <= 1e-15 * p.maxCoeff());
  CHECK_THROWS_AS(to_probability_density(m, Eigen::VectorXd::Zero(m.num_elements())), std::domain_error);
}

TEST_CASE("expected counts") {
  const TriMesh m = generate_mesh(DomainSpec::rectangle(kAspect), kAspect / 4);
  const Eigen::VectorXd d = Eigen::VectorXd::Constant(m.num_elements(), 2.5);
  std::vector<int> all, half;
  for (int k = 0; k < m.num_elements(); ++k) {
    all.push_back(k);
    if (m.centroid(k).x() < 0.5) half.push_back(k);
  }
  CHECK(expected_count(m, d, all, 1500.0) == doctest::Approx(1500.0).epsilon(1e-12));
  CHECK(expected_count(m, d, {}, 1500.0) == 0.0);
  CHECK(expected_count(m, d, half, 1500.0) == doctest::Approx(750.0).epsilon(1e-12));
}

TEST_CASE("pure advection egress time") {
  // Blob on the upstream strip [-0.1, 0]: its tail crosses x = 1 at t = 1.1.
  // At the CFL limit each step moves an element by about one pitch, so the
  // first-order smearing stays small enough for the mass-closure criterion.
  const TriMesh m = generate_mesh(DomainSpec::rectangle(kAspect, 0.1), 0.005);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k)
    if (m.centroid(k).x() < 0) d[k] = 1.0;
  const Eigen::Matrix2Xd vd = Eigen::Matrix2Xd::Zero(2, m.num_elements()).colwise() + Vec2(1, 0);
  SimulationParams p;
  p.interaction = {0.0, 0.02, std::numbers::pi / 4, 0.5 * m.h_min()};
  p.cfl_safety = 1.0;
  p.dt_max = 1.0;
  p.t_end = 3.0;
  Simulation sim(m, vd, p, d);
  const double total = total_mass(m, d);
  std::vector<double> t, g;
  sim.run(total, [&](const Simulation& s) {
    t.push_back(s.time());
    g.push_back(s.egress());
  });
  CHECK(egress_time(t, g, total) == doctest::Approx(1.1).epsilon(0.02));
}

TEST_CASE("nonlinearity witness") {
  // Evolving N rho and rescaling by 1/N agrees with evolving rho only when c = 0.
  const TriMesh m = generate_mesh(DomainSpec::rectangle(kAspect), kAspect / 8);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k) {
    const double x = m.centroid(k).x();
    if (x > 0.1 && x < 0.3) rho[k] = std::sin(std::numbers::pi * (x - 0.1) / 0.2);
  }
  rho /= total_mass(m, rho);
  const Eigen::Matrix2Xd vd = Eigen::Matrix2Xd::Zero(2, m.num_elements()).colwise() + Vec2(1, 0);
  auto gap = [&](double c) {
    SimulationParams p;
    p.interaction = {c, 0.02, std::numbers::pi / 4, 0.5 * m.h_min()};
    p.boundary.outlet_open = false;
    const double N = 100.0;
    Simulation one(m, vd, p, rho), many(m, vd, p, N * rho);
    const double dt = 0.3 * m.h_min();
    for (int n = 0; n < 100; ++n) {
      one.step(dt);
      many.step(dt);
    }
    return (many.density() / N - one.density()).cwiseAbs().dot(m.areas());
  };
  CHECK(gap(0.0) <= 1e-12);
  CHECK(gap(5e-4) > 1e-6);
}
