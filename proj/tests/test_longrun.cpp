#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"
#include "nlvar/longrun.hpp"

#include <cmath>

using namespace nlvar;
using fixtures::v2;

namespace {

struct Case {
  ModelSpec model;
  MembershipReport report;
};

Case with_report(ModelSpec m) {
  MembershipReport rep = check_membership(m);
  REQUIRE(rep.member());
  return {std::move(m), std::move(rep)};
}

// Point on the attractor with trend coordinate w.
Vec on_attractor(const Case& c, const Vec& w) {
  Vec y(c.model.p());
  y << w, -c.report.mu;
  return chi_inverse(c.model, c.report, y);
}

std::vector<Vec> steady(const Case& c, const Vec& z) { return std::vector<Vec>(c.model.k(), z); }

// Central differences of u -> z_infinity(u; state) at u = 0.
Mat fd_multiplier(const Case& c, std::span<const Vec> state, double h) {
  const int p = c.model.p();
  Mat out(p, p);
  for (int j = 0; j < p; ++j) {
    const Vec e = Vec::Unit(p, j) * h;
    out.col(j) = (z_infinity(c.model, c.report, e, state) - z_infinity(c.model, c.report, -e, state)) / (2 * h);
  }
  return out;
}

TransitoryConfig figure_config() {
  TransitoryConfig cfg;
  cfg.alpha_inner = -v2(1.0, 0.5);
  cfg.alpha_outer = -v2(1.0, 0.25);
  cfg.beta = v2(1.0, -1.0);
  return cfg;
}

}  // namespace

TEST_CASE("EX-L attractor is the line beta' z = 0") {
  const Case c = with_report(fixtures::ex_l());
  const AttractorSample s = attractor_points(c.model, c.report, {Vec::Constant(1, -1.0), Vec::Zero(1), Vec::Ones(1)});
  REQUIRE(s.points.size() == 3);
  for (const Vec& z : s.points) CHECK(std::abs(z(0) - z(1)) < 1e-14);
  CHECK((s.points[2] - v2(1.0, 1.0)).norm() < 1e-14);
  CHECK(s.points[1].norm() < 1e-14);

  LinearFamily lin;
  lin.phi = {Mat::Identity(2, 2), 0.5 * Mat::Identity(2, 2)};
  const ModelSpec stat = make_model(2, 1, Vec::Zero(2), lin);
  CHECK_THROWS_AS(attractor_points(stat, check_membership(stat), {}), StationaryModel);
}

TEST_CASE("attractor points solve pi(z) = -c") {
  std::mt19937_64 rng(151);
  const std::vector<ModelSpec> models{fixtures::random_linear_member(rng, 3, 2, 1),
                                      fixtures::random_threshold_member(rng, 3, 2, 1, 3),
                                      fixtures::random_conic_member(rng, 2, 2, 1),
                                      fixtures::random_smoothed_member(rng, 2, 1, 1, 2, 0.4)};
  for (const ModelSpec& m : models) {
    const Case c = with_report(m);
    std::vector<Vec> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(fixtures::random_vector(rng, c.report.q, 3.0));
    const AttractorSample s = attractor_points(c.model, c.report, grid);
    for (const Vec& z : s.points) {
      CHECK((chi(c.model, c.report, z).theta + c.report.mu).norm() <= 1e-9);
      CHECK((pi_eval(c.model, z) + c.model.c()).norm() <= 1e-8);
    }
  }
}

TEST_CASE("hbar on linear models") {
  std::mt19937_64 rng(157);
  const Case c = with_report(fixtures::random_linear_member(rng, 3, 3, 1));
  const VecmForm v = derive_vecm(c.model);
  std::vector<Vec> w;
  for (int i = 0; i < 3; ++i) w.push_back(fixtures::random_vector(rng, 3));
  const Vec direct = c.model.piece_matrix(0, 0) * w[0] - v.regimes[0].gammas[0] * w[1] - v.regimes[0].gammas[1] * w[2];
  CHECK((hbar(c.model, w) - direct).norm() < 1e-13);

  const Case l = with_report(fixtures::ex_l());
  const std::vector<Vec> one{v2(0.3, 0.9)};
  CHECK((hbar(l.model, one) - v2(0.3, 0.9)).norm() == 0.0);
}

TEST_CASE("z_infinity fixed points and shocks along alpha") {
  std::mt19937_64 rng(163);
  for (const ModelSpec& m : {fixtures::ex_l(), fixtures::ex_t(), fixtures::random_threshold_member(rng, 3, 2, 1, 3)}) {
    const Case c = with_report(m);
    const Vec z = on_attractor(c, fixtures::random_vector(rng, c.report.q));
    const auto state = steady(c, z);
    CHECK((z_infinity(c.model, c.report, Vec::Zero(c.model.p()), state) - z).norm() < 1e-10);

    std::vector<Vec> random_state;
    for (int i = 0; i < c.model.k(); ++i) random_state.push_back(fixtures::random_vector(rng, c.model.p()));
    const Vec base = z_infinity(c.model, c.report, Vec::Zero(c.model.p()), random_state);
    for (int i = 0; i < 5; ++i) {
      const Vec u = c.report.alpha * fixtures::random_vector(rng, c.report.r, 2.0);
      CHECK((z_infinity(c.model, c.report, u, random_state) - base).norm() <= 1e-8);
    }
  }
}

TEST_CASE("simulated limits match z_infinity") {
  std::mt19937_64 rng(167);
  const std::vector<ModelSpec> models{fixtures::ex_l(), fixtures::ex_t(), fixtures::random_linear_member(rng, 3, 2, 1),
                                      fixtures::random_threshold_member(rng, 2, 2, 1, 3),
                                      fixtures::random_conic_member(rng, 2, 1, 1)};
  for (const ModelSpec& m : models) {
    const Case c = with_report(m);
    const Mat w = fixtures::random_matrix(rng, c.model.k(), c.model.p());
    const Vec u = fixtures::random_vector(rng, c.model.p(), 2.0);
    const PathResult r = simulate(c.model, w, ImpulseThenZero{u, 1, 500});
    CHECK((r.z(500) - z_infinity(c.model, c.report, u, fixtures::rows_of(w))).norm() <= 1e-6);
  }
}

TEST_CASE("domain of attraction") {
  std::mt19937_64 rng(173);
  const Case l = with_report(fixtures::ex_l());
  const Vec z = v2(2.0, 2.0);
  const AffineSubspace self = domain_of_attraction(l.model, l.report, z, steady(l, z));
  CHECK(self.offset.norm() < 1e-14);
  CHECK((linalg::spectral_norm(self.basis * self.basis.transpose() - l.report.alpha * l.report.alpha.transpose())) < 1e-14);
  CHECK_THROWS_AS(domain_of_attraction(l.model, l.report, v2(1.0, 0.0), steady(l, z)), NotOnAttractor);

  // EX-L: offset H z - hbar(state) with H = I.
  const std::vector<Vec> state{v2(0.4, -0.7)};
  const AffineSubspace d = domain_of_attraction(l.model, l.report, z, state);
  CHECK((d.offset - (z - state[0])).norm() < 1e-14);

  for (const ModelSpec& m : {fixtures::ex_t(), fixtures::random_threshold_member(rng, 3, 2, 2, 2)}) {
    const Case c = with_report(m);
    const Vec target = on_attractor(c, fixtures::random_vector(rng, c.report.q));
    std::vector<Vec> st;
    for (int i = 0; i < c.model.k(); ++i) st.push_back(fixtures::random_vector(rng, c.model.p()));
    const AffineSubspace dom = domain_of_attraction(c.model, c.report, target, st);
    for (int i = 0; i < 10; ++i) {
      const Vec u = dom.basis * fixtures::random_vector(rng, dom.basis.cols(), 2.0) + dom.offset;
      CHECK((z_infinity(c.model, c.report, u, st) - target).norm() <= 1e-6);
    }
  }
}

TEST_CASE("EX-L long-run multiplier") {
  const Case c = with_report(fixtures::ex_l());
  const MultiplierResult r = longrun_multipliers(c.model, c.report, v2(0.0, 0.0));
  Mat expected(2, 2);
  expected << 0, 1, 0, 1;
  CHECK((r.theta_inf - expected).norm() < 1e-10);
  CHECK(r.rank == 1);
  CHECK(r.differentiable);
  CHECK((r.theta_inf * c.report.alpha).norm() < 1e-15);
  CHECK_THROWS_AS(longrun_multipliers(c.model, c.report, v2(1.0, 0.0)), NotOnAttractor);
}

TEST_CASE("multipliers: kernel law, rank and finite differences") {
  std::mt19937_64 rng(179);
  const std::vector<ModelSpec> models{fixtures::random_linear_member(rng, 3, 2, 1),
                                      fixtures::random_linear_member(rng, 4, 3, 2),
                                      fixtures::random_threshold_member(rng, 3, 2, 1, 3),
                                      fixtures::random_conic_member(rng, 2, 2, 1),
                                      fixtures::random_smoothed_member(rng, 2, 2, 1, 2, 0.4)};
  int interior = 0;
  for (const ModelSpec& m : models) {
    const Case c = with_report(m);
    for (int i = 0; i < 5; ++i) {
      const Vec z = on_attractor(c, fixtures::random_vector(rng, c.report.q, 2.0));
      const MultiplierResult r = longrun_multipliers(c.model, c.report, z);
      if (!r.differentiable) continue;
      ++interior;
      CHECK((r.theta_inf * c.report.alpha).norm() <= 1e-9 * linalg::spectral_norm(r.theta_inf));
      CHECK(r.rank == c.report.q);
      CHECK((r.theta_inf * r.kernel_basis).norm() <= 1e-9 * linalg::spectral_norm(r.theta_inf));
      CHECK((fd_multiplier(c, steady(c, z), 1e-5) - r.theta_inf).norm() <= 1e-6);
    }
  }
  CHECK(interior >= 20);
}

TEST_CASE("boundary points of the attractor are not differentiable") {
  const Case c = with_report(fixtures::ex_t());
  // Regime 0 equilibria are z1 = z2 <= 1; (1, 1) sits on the threshold.
  CHECK_FALSE(longrun_multipliers(c.model, c.report, v2(1.0, 1.0)).differentiable);
  const MultiplierResult inner = longrun_multipliers(c.model, c.report, v2(0.5, 0.5));
  CHECK(inner.differentiable);
  CHECK(inner.rank == 1);
}

TEST_CASE("the linear multiplier closed form") {
  std::mt19937_64 rng(181);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = fixtures::uniform_int(rng, 2, 4);
    const Case c = with_report(fixtures::random_linear_member(rng, p, fixtures::uniform_int(rng, 1, 3),
                                                              fixtures::uniform_int(rng, 1, p - 1)));
    const Mat H = linear_diagnostics(c.model).H;
    const Mat bp = linalg::orthogonal_complement(c.report.betas[0]);
    const Mat& ap = c.report.alpha_perp;
    const Mat closed = bp * (ap.transpose() * H * bp).inverse() * ap.transpose();
    const Vec z = on_attractor(c, fixtures::random_vector(rng, c.report.q));
    CHECK((longrun_multipliers(c.model, c.report, z).theta_inf - closed).norm() <= 1e-8);
  }
}

TEST_CASE("z_infinity depends on the state only through alpha_perp' hbar") {
  std::mt19937_64 rng(191);
  const Case c = with_report(fixtures::random_linear_member(rng, 3, 2, 1));
  const Mat phi0_inv = c.model.piece_matrix(0, 0).inverse();
  const Mat& ap = c.report.alpha_perp;
  const std::vector<Vec> a{fixtures::random_vector(rng, 3), fixtures::random_vector(rng, 3)};
  const Vec u = fixtures::random_vector(rng, 3);
  const Vec base = z_infinity(c.model, c.report, u, a);
  for (int i = 0; i < 10; ++i) {
    std::vector<Vec> b{fixtures::random_vector(rng, 3, 3.0), fixtures::random_vector(rng, 3, 3.0)};
    // Move z_0 so that alpha_perp' hbar matches the reference state.
    b[0] += phi0_inv * ap * (ap.transpose() * (hbar(c.model, a) - hbar(c.model, b)));
    CHECK((z_infinity(c.model, c.report, u, b) - base).norm() <= 1e-9);
  }
}

TEST_CASE("long-run identification") {
  const Case l = with_report(fixtures::ex_l());
  const Mat u = lr_identify_construct(l.report, 1);
  CHECK(std::abs(std::abs(u(0, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(u(1, 0)) < 1e-15);
  CHECK((u.transpose() * u - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK_THROWS_AS(lr_identify_construct(l.report, 0), PreconditionError);
  CHECK_THROWS_AS(lr_identify_construct(l.report, 2), PreconditionError);

  std::mt19937_64 rng(193);
  const Case c = with_report(fixtures::random_linear_member(rng, 4, 2, 2));
  const Mat v = lr_identify_construct(c.report, 2);
  const IdentificationCheck ok = lr_identify_check(c.report, v, 2, 1e-12);
  CHECK(ok.ok);
  CHECK(ok.residual <= 1e-12);
  CHECK((v.transpose() * v - Mat::Identity(4, 4)).norm() < 1e-12);

  // The identity fails once alpha_perp has a component along e_1.
  const IdentificationCheck id = lr_identify_check(c.report, Mat::Identity(4, 4), 1, 1e-12);
  CHECK((c.report.alpha_perp.row(0).norm() > 1e-6) == !id.ok);
  CHECK(id.residual == doctest::Approx(c.report.alpha_perp.row(0).norm()));

  // Rotating the unrestricted columns keeps the restriction.
  Eigen::HouseholderQR<Mat> qr(fixtures::random_matrix(rng, 2, 2));
  Mat rotated = v;
  rotated.rightCols(2) = v.rightCols(2) * Mat(qr.householderQ());
  CHECK(lr_identify_check(c.report, rotated, 2, 1e-12).ok);

  // A small rotation mixing a restricted and an unrestricted column breaks it.
  Mat g = Mat::Identity(4, 4);
  const double t = 1e-3;
  g(0, 0) = std::cos(t);
  g(0, 3) = -std::sin(t);
  g(3, 0) = std::sin(t);
  g(3, 3) = std::cos(t);
  const IdentificationCheck bad = lr_identify_check(c.report, v * g, 2, 1e-12);
  CHECK_FALSE(bad.ok);
  CHECK(bad.residual > 1e-6);

  CHECK_THROWS_AS(lr_identify_check(c.report, 2.0 * v, 2, 1e-12), NotOrthogonal);
}

TEST_CASE("transitory loading interpolates between the two loadings") {
  const TransitoryConfig cfg = figure_config();
  CHECK((transitory_loading(cfg, 0.0) - cfg.alpha_inner).norm() < 1e-15);
  CHECK((transitory_loading(cfg, 40.0) - cfg.alpha_outer).norm() < 1e-15);
  CHECK((transitory_loading(cfg, -40.0) - cfg.alpha_outer).norm() < 1e-15);
}

TEST_CASE("transitory direction curve") {
  TransitoryConfig cfg = figure_config();
  cfg.magnitudes = {0.01, 1.0, 10.0, 20.0};
  const TransitoryCurve curve = transitory_direction_curve(cfg);
  REQUIRE(curve.ratios.size() == 4);
  for (bool b : curve.converged) CHECK(b);
  CHECK(curve.ratios[0] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(curve.ratios[2] < curve.ratios[1]);
  CHECK(curve.ratios[3] == doctest::Approx(0.26).epsilon(0.04));
  // The found direction really has no permanent effect.
  const double phi = curve.roots[1][0].angle;
  CHECK(std::abs(transitory_residual(cfg, v2(std::cos(phi), std::sin(phi)))) <= cfg.tol);
}

TEST_CASE("a common loading gives a constant direction") {
  TransitoryConfig cfg = figure_config();
  cfg.alpha_inner = cfg.alpha_outer;
  cfg.magnitudes = {0.01, 1.0, 5.0, 20.0};
  const TransitoryCurve curve = transitory_direction_curve(cfg);
  for (double r : curve.ratios) CHECK(r == doctest::Approx(0.25).epsilon(1e-6));
}
