#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bjj/harness.hpp"

using bjj::Strategy;
using bjj::SweepSpec;
using bjj::Tier;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("fit_rabi") {
  SUBCASE("noiseless synthetic data") {
    std::vector<double> ts, eps;
    for (int i = 0; i < 20; ++i) {
      const double t = 0.1 + 0.12 * i;
      ts.push_back(t);
      eps.push_back(std::cos(0.8 * t) * std::cos(0.8 * t));
    }
    const auto fit = bjj::fit_rabi(eps, ts);
    CHECK(std::abs(fit.j_fit - 0.8) < 1e-4);
    CHECK(fit.r2 > 1.0 - 1e-10);
    CHECK_FALSE(fit.poor_fit);
  }

  SUBCASE("1% additive noise") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    std::vector<double> ts, eps;
    for (int i = 0; i < 20; ++i) {
      const double t = 0.1 + 0.12 * i;
      ts.push_back(t);
      eps.push_back(std::cos(0.8 * t) * std::cos(0.8 * t) + u(gen));
    }
    const auto fit = bjj::fit_rabi(eps, ts);
    CHECK(std::abs(fit.j_fit - 0.8) < 1e-2);
  }

  SUBCASE("constant data cannot be fit") {
    std::vector<double> ts, eps;
    for (int i = 0; i < 10; ++i) {
      ts.push_back(0.2 + 0.2 * i);
      eps.push_back(0.5);
    }
    const auto fit = bjj::fit_rabi(eps, ts);
    CHECK(fit.poor_fit);
  }

  SUBCASE("too few points throws") {
    std::vector<double> few{0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS(bjj::fit_rabi(few, few));
  }
}

TEST_CASE("two-mode sweep") {
  SweepSpec spec;
  spec.tier = Tier::two_mode;
  spec.strategies = {Strategy::uncontrolled, Strategy::ccp_feedback};
  spec.interactions = {0.0, 3.0};
  spec.t_values = {0.25, 0.5, 0.75, 1.0, 1.25};
  spec.jobs = 1;

  auto result = bjj::run_sweep(spec);
  REQUIRE(result.rows.size() == 2 * 2 * 5);
  CHECK(result.t_qsl_l_abs == doctest::Approx(kPi / 2));

  auto find = [&](const char* s, double inter, double t) -> const bjj::SweepRow& {
    for (const auto& r : result.rows)
      if (r.strategy == s && r.interaction == inter &&
          std::abs(r.t_over_tqsl_l - t) < 1e-12)
        return r;
    throw std::runtime_error("row not found");
  };

  SUBCASE("linear geodesic transfer at T_qsl") {
    CHECK(find("uncontrolled", 0.0, 1.0).epsilon < 1e-6);
    CHECK(find("uncontrolled", 0.0, 1.0).path_length ==
          doctest::Approx(kPi).epsilon(1e-6));
  }
  SUBCASE("self-trapped at Lambda = 3") {
    double min_eps = 1.0;
    for (double t : spec.t_values)
      min_eps = std::min(min_eps, find("uncontrolled", 3.0, t).epsilon);
    CHECK(min_eps > 0.5);
    CHECK(find("uncontrolled", 3.0, 1.0).flag == "self-trapped");
  }
  SUBCASE("compensated transfer is interaction independent") {
    CHECK(find("ccp-feedback", 3.0, 1.0).epsilon < 1e-6);
    CHECK(find("ccp-feedback", 0.0, 1.0).epsilon < 1e-6);
  }
  SUBCASE("rows carry no depletion for this tier and sort deterministically") {
    for (const auto& r : result.rows) CHECK_FALSE(r.has_depletion);
    auto again = bjj::run_sweep(spec);
    REQUIRE(again.rows.size() == result.rows.size());
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      CHECK(again.rows[i].strategy == result.rows[i].strategy);
      CHECK(again.rows[i].epsilon == result.rows[i].epsilon);
      CHECK(again.rows[i].path_length == result.rows[i].path_length);
    }
  }
}

TEST_CASE("sweep rows match fresh single-cell runs") {
  SweepSpec spec;
  spec.tier = Tier::two_mode;
  spec.strategies = {Strategy::ccp_feedback};
  spec.interactions = {1.0};
  spec.t_values = {0.3, 0.6, 1.0};
  auto result = bjj::run_sweep(spec);

  bjj::Harness h(spec);
  for (const auto& r : result.rows) {
    auto cs = h.run_cell_series(Strategy::ccp_feedback, 1.0, r.t_over_tqsl_l, 1);
    CHECK(cs.row.epsilon == r.epsilon);  // identical step grids, bit-identical
    CHECK(cs.row.path_length == r.path_length);
  }
}

TEST_CASE("tqsl extraction") {
  SweepSpec spec;
  spec.tier = Tier::two_mode;
  spec.strategies = {Strategy::ccp_feedback, Strategy::uncontrolled};
  spec.interactions = {0.0, 1.0, 3.0};
  spec.t_values = {0.5, 0.7, 0.9, 1.0, 1.1, 1.3};
  spec.do_tqsl = true;
  spec.tqsl_threshold = 0.01;
  auto result = bjj::run_sweep(spec);

  auto find = [&](const char* s, double inter) -> const bjj::TqslEntry& {
    for (const auto& te : result.tqsl)
      if (te.strategy == s && te.interaction == inter) return te;
    throw std::runtime_error("tqsl entry not found");
  };

  SUBCASE("linear case crosses at T_qsl within 1e-3") {
    const auto& te = find("ccp-feedback", 0.0);
    REQUIRE(te.est.crossed);
    // eps(T) = cos^2(JT) crosses 0.01 at T/T_qsl = 1 - 2 asin(0.1)/pi
    const double want = 1.0 - 2.0 * std::asin(0.1) / kPi;
    CHECK(std::abs(te.est.t_refined - want) < 1e-3);
  }
  SUBCASE("compensation removes the interaction dependence") {
    for (double inter : {0.0, 1.0, 3.0}) {
      const auto& te = find("ccp-feedback", inter);
      REQUIRE(te.est.crossed);
      CHECK(std::abs(te.est.t_refined - find("ccp-feedback", 0.0).est.t_refined) < 5e-3);
    }
  }
  SUBCASE("self-trapping never crosses") {
    const auto& te = find("uncontrolled", 3.0);
    CHECK_FALSE(te.est.crossed);
    CHECK(te.est.min_eps > 0.5);
  }
  SUBCASE("threshold monotonicity") {
    bjj::Harness h(spec);
    double prev = 1e9;
    for (double thr : {0.005, 0.01, 0.05, 0.2}) {
      const auto est = h.extract_tqsl(result, Strategy::ccp_feedback, 0.0, thr);
      REQUIRE(est.crossed);
      CHECK(est.t_refined <= prev + 1e-12);
      prev = est.t_refined;
    }
  }
}

TEST_CASE("dimer sweep carries depletion; N = 1 has none") {
  SweepSpec spec;
  spec.tier = Tier::dimer;
  spec.strategies = {Strategy::ccp_feedback};
  spec.interactions = {0.0};
  spec.t_values = {1.0};
  spec.num.n_bosons = 1;
  auto result = bjj::run_sweep(spec);
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].has_depletion);
  CHECK(result.rows[0].depletion_max == 0.0);
  CHECK(result.rows[0].epsilon < 1e-5);
}

TEST_CASE("dimer sweep at N = 60 near the QSL") {
  SweepSpec spec;
  spec.tier = Tier::dimer;
  spec.strategies = {Strategy::ccp_feedback, Strategy::ccp_scheduled};
  spec.interactions = {1.0};
  spec.t_values = {1.0};
  spec.num.n_bosons = 60;
  auto result = bjj::run_sweep(spec);
  REQUIRE(result.rows.size() == 2);
  for (const auto& r : result.rows) {
    CHECK(r.epsilon > 1e-3);   // many-body corrections forbid a perfect ride
    CHECK(r.epsilon < 0.5);
    CHECK(r.depletion_max > 1e-4);
  }
}

TEST_CASE("failed cells become flagged rows, not aborts") {
  SweepSpec spec;
  spec.tier = Tier::two_mode;
  spec.strategies = {Strategy::ccp_feedback};
  spec.interactions = {1.0};
  spec.t_values = {1.0};
  spec.num.dt = 1.0;  // absurd step: the propagator rejects it
  auto result = bjj::run_sweep(spec);
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].flag.substr(0, 6) == "error:");
  CHECK(std::isnan(result.rows[0].epsilon));
}

TEST_CASE("sweep validation") {
  SweepSpec spec;
  spec.t_values = {};
  CHECK_THROWS_AS(spec.validate(), bjj::ConfigError);
  spec.t_values = {1.0};
  spec.strategies = {};
  CHECK_THROWS_AS(spec.validate(), bjj::ConfigError);
  spec.strategies = {Strategy::uncontrolled};
  spec.t_values = {-1.0};
  CHECK_THROWS_AS(spec.validate(), bjj::ConfigError);
}

TEST_CASE("gpe sweep smoke test on a coarse grid") {
  SweepSpec spec;
  spec.tier = Tier::gpe;
  spec.strategies = {Strategy::uncontrolled};
  spec.interactions = {0.0};
  spec.t_values = {0.5, 1.0};
  spec.num.grid = bjj::Grid1D(-10.0, 10.0, 256);
  spec.num.dt = 2e-3;  // coarse smoke test
  auto result = bjj::run_sweep(spec);
  REQUIRE(result.rows.size() == 2);
  REQUIRE(result.calibrations.size() == 1);
  CHECK(result.calibrations[0].calib.j_lin > 0);
  // linear double well transfers on the geodesic Rabi law
  CHECK(result.rows[1].epsilon < 1e-2);
  CHECK(result.rows[0].epsilon ==
        doctest::Approx(std::cos(0.5 * kPi / 2) * std::cos(0.5 * kPi / 2)).epsilon(0.05));
}
