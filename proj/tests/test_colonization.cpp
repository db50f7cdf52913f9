#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rth/colonization.hpp"
#include "test_util.hpp"

using namespace rth;

namespace {

CoreState random_state(const GridSpec& g, unsigned seed, double lo = 0.0,
                       double hi = 1.0) {
  auto gen = test::rng(seed);
  return CoreState(0.0, test::random_scalar_field(g, gen, lo, hi),
                   test::random_traveler_field(g, gen, lo, hi));
}

}  // namespace

TEST_CASE("colonize_flux") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.4, 0.9, 0.5, 1.6};

  SUBCASE("p = 1 kills the flux") {
    auto gen = test::rng(3);
    const auto v = test::random_traveler_field(g, gen);
    const auto out = colonize_flux(v, core, ColonizationParams{1.0});
    CHECK(out.values.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("constant field, p = 0") {
    const auto v = TravelerField::constant(g, 0.3);
    const auto out = colonize_flux(v, core, ColonizationParams{0.0});
    const double expected = core.alpha * 0.3 * g.length * g.length;
    CHECK(out.values.minCoeff() == doctest::Approx(expected));
    CHECK(out.values.maxCoeff() == doctest::Approx(expected));
  }

  SUBCASE("profile columns give alpha (1-p) c") {
    const auto rho = test::normalized_bump(g);
    const auto v = test::traveler_from_profile_loops(rho, ScalarField::constant(g, 0.7));
    ColonizationParams ext;
    ext.p = 0.25;
    const auto out = colonize_flux(v, core, ext);
    const double expected = core.alpha * 0.75 * 0.7;
    CHECK((out.values.array() - expected).abs().maxCoeff() <= 1e-12);
  }

  SUBCASE("frame mismatch") {
    CHECK_THROWS_AS(
        colonize_flux(TravelerField::zero(g, Frame::lagrangian), core, {}),
        std::invalid_argument);
  }
}

TEST_CASE("colonize_flux agrees with its Lagrangian-frame assembly") {
  // Same diagonal sum written through the offset coordinates:
  // flux(y) = alpha (1-p) h^2 sum_{y'} w(z, y') with z the offset of y from y'.
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.3, 0.8, 0.5, 1.6};
  ColonizationParams ext;
  ext.p = 0.3;
  auto gen = test::rng(41);
  const auto v = test::random_traveler_field(g, gen, 0.0, 1.0);
  const auto flux = colonize_flux(v, core, ext);

  const auto w = to_lagrangian(v);
  const Index n = g.points;
  ScalarField from_lagrangian(g);
  for (Index y1 = 0; y1 < n; ++y1)
    for (Index y2 = 0; y2 < n; ++y2) {
      double acc = 0;
      for (Index j1 = 0; j1 < n; ++j1)
        for (Index j2 = 0; j2 < n; ++j2)
          acc += w.values(flat_index(offset_index(y1, j1, n), offset_index(y2, j2, n), n),
                          flat_index(j1, j2, n));
      from_lagrangian(y1, y2) = core.alpha * (1.0 - ext.p) * acc * g.cell_area();
    }
  CHECK(test::max_abs_diff(flux.values, from_lagrangian.values) < 1e-13);
}

TEST_CASE("p = 1 with no vital dynamics reduces to the base model") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.2, 0.7, 0.5, 1.6};
  ColonizationParams ext;
  ext.p = 1.0;

  auto base = random_state(g, 7);
  auto colonized = base;
  for (int i = 0; i < 10; ++i) {
    base = step(base, 0.08, core);
    colonized = step_colonization(colonized, 0.08, core, ext);
    CHECK(test::max_abs_diff(base.u.values, colonized.u.values) <= 1e-12);
    CHECK(test::max_abs_diff(base.v.values, colonized.v.values) <= 1e-12);
  }
}

TEST_CASE("logistic fixed point is stationary") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.0, 0.0, 0.5, 1.6};  // gamma = 0: nobody leaves home
  ColonizationParams ext;
  ext.p = 1.0;
  ext.beta = 1.4;
  ext.mu = 0.4;
  ext.kappa = 0.5;
  const double cap = (ext.beta - ext.mu) / ext.kappa;

  CoreState state(0.0, ScalarField::constant(g, cap), TravelerField::zero(g));
  for (double dt : {0.1, 0.05}) {
    const auto out = step_colonization(state, dt, core, ext);
    CHECK(test::max_abs_diff(out.u.values, state.u.values) <= 1e-14);
  }
}

TEST_CASE("logistic growth stays below the carrying bound") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.0, 0.0, 0.5, 1.6};
  ColonizationParams ext;
  ext.p = 1.0;
  ext.beta = 1.2;
  ext.mu = 0.2;
  ext.kappa = 0.8;
  const double cap = (ext.beta - ext.mu) / ext.kappa;

  auto gen = test::rng(11);
  CoreState state(0.0, test::random_scalar_field(g, gen, 0.0, 0.9),
                  TravelerField::zero(g));
  const double bound = std::max(norm_sup(state.u), cap);
  for (int i = 0; i < 60; ++i) {
    state = step_colonization(state, 0.05, core, ext);
    CHECK(state.u.values.maxCoeff() <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("global conservation with balanced vital rates") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.1, 0.8, 0.5, 1.6};

  SUBCASE("diffuse and rest: p = 0, no vital dynamics") {
    ColonizationParams ext;
    ext.p = 0.0;
    auto state = random_state(g, 13);
    const double total0 = global_population(state);
    for (int i = 0; i < 50; ++i) state = step_colonization(state, 0.05, core, ext);
    CHECK(std::abs(global_population(state) - total0) <= 1e-10 * total0);
  }

  SUBCASE("beta = mu, kappa = nu = 0, partial return") {
    ColonizationParams ext;
    ext.p = 0.4;
    ext.beta = 0.7;
    ext.mu = 0.7;
    auto state = random_state(g, 17);
    const double total0 = global_population(state);
    for (int i = 0; i < 40; ++i) state = step_colonization(state, 0.05, core, ext);
    CHECK(std::abs(global_population(state) - total0) <= 1e-10 * total0);
  }
}

TEST_CASE("positivity across the p range") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.0, 0.9, 0.5, 1.6};
  for (double p : {0.0, 0.5, 1.0}) {
    ColonizationParams ext;
    ext.p = p;
    ext.beta = 0.4;
    ext.mu = 0.1;
    ext.kappa = 0.3;
    ext.nu = 0.2;
    auto state = random_state(g, 19);
    const double scale =
        std::max(norm_sup(state.u), state.v.values.cwiseAbs().maxCoeff());
    for (int i = 0; i < 30; ++i) {
      state = step_colonization(state, 0.05, core, ext);
      CHECK(state.min_value() >= -1e-10 * scale);
    }
  }
}

TEST_CASE("check_monotone") {
  const GridSpec g = make_grid(10.0, 8);
  const CoreParams core{1.0, 0.8, 0.5, 1.6};
  ColonizationParams ext;
  ext.p = 0.5;
  ext.beta = 1.0;
  ext.mu = 0.2;
  ext.kappa = 0.4;  // carrying bound 2.0, data kept below

  SUBCASE("zero lower state reduces to positivity") {
    const auto hi = random_state(g, 23, 0.0, 1.0);
    const auto report = check_monotone(CoreState(g), hi, 0.3, 0.05, core, ext);
    CHECK(report.precondition_ok);
    CHECK(report.pass);
  }

  SUBCASE("equal states give zero violation") {
    const auto s = random_state(g, 29, 0.0, 1.0);
    const auto report = check_monotone(s, s, 0.2, 0.05, core, ext);
    CHECK(report.precondition_ok);
    CHECK(report.max_violation == 0.0);
  }

  SUBCASE("random smooth ordered pairs stay ordered") {
    // Resolved bumps: a spectral propagator is order preserving only on
    // fields whose interpolant is nonnegative, not on nodewise noise.
    auto gen = test::rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto smooth_state = [&]() {
      const auto profile = gaussian_rho(g, 2.0 * g.spacing() * (1.0 + unit(gen)), false);
      auto weights = test::random_scalar_field(g, gen, 0.0, 0.0);
      weights.values.setConstant(0.3 * unit(gen));
      auto u = test::normalized_bump(g);
      u.values *= unit(gen);
      u.values.array() += 0.1 * unit(gen);
      auto bump = test::normalized_bump(g);
      weights.values += 0.4 * unit(gen) * bump.values;
      return CoreState(0.0, u, traveler_from_kernel(profile, weights));
    };
    for (int trial = 0; trial < 5; ++trial) {
      const auto lo = smooth_state();
      const auto gap = smooth_state();
      auto hi = lo;
      hi.u.values += gap.u.values;
      hi.v.values += gap.v.values;
      const auto report = check_monotone(lo, hi, 0.3, 0.02, core, ext);
      CHECK(report.precondition_ok);
      CHECK(report.pass);
    }
  }

  SUBCASE("violated precondition is reported, not evolved") {
    const auto hi = random_state(g, 37, 0.0, 1.0);
    auto lo = hi;
    lo.u.values[0] += 1.0;  // lo > hi somewhere
    const auto report = check_monotone(lo, hi, 0.2, 0.05, core, ext);
    CHECK_FALSE(report.precondition_ok);
    CHECK_FALSE(report.pass);
  }
}
