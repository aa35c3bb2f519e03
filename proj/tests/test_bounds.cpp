#include <doctest.h>

#include <cmath>
#include <random>

#include "qcorr/bounds.hpp"

using namespace qcorr;

namespace {

ProtocolConfig cfg_with(double delta, double pmu = 1.0, double pnu = 0.0, double pom = 0.0,
                        double mu = 0.5, double nu = 0.2, double om = 1e-4) {
  ProtocolConfig c;
  c.mu = mu;
  c.nu = nu;
  c.omega = om;
  c.p_mu = pmu;
  c.p_nu = pnu;
  c.p_omega = pom;
  c.delta_max = delta;
  return c;
}

// central finite difference of the piecewise bound
double fd_derivative(double y, double z, Sign s, double h = 1e-6) {
  return (cs_bound(y + h, z, s) - cs_bound(y - h, z, s)) / (2 * h);
}

}  // namespace

TEST_CASE("cs_envelope closed-form values") {
  CHECK(cs_envelope(0.5, 1.0, Sign::plus) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cs_envelope(0.0, 0.5, Sign::plus) == doctest::Approx(0.5).epsilon(1e-15));
  // 0.25 + 0.25*0.5 + 2*sqrt(0.75*0.25*0.25*0.75) = 0.25 + 0.125 + 0.375
  CHECK(cs_envelope(0.25, 0.75, Sign::plus) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(cs_envelope(-0.1, 0.5, Sign::plus), std::domain_error);
  CHECK_THROWS_AS(cs_envelope(0.5, 0.0, Sign::plus), std::domain_error);
  CHECK_THROWS_AS(cs_envelope(0.5, 1.5, Sign::plus), std::domain_error);
}

TEST_CASE("cs_bound branch selection") {
  CHECK(cs_bound(0.2, 0.5, Sign::minus) == 0.0);
  CHECK(cs_bound(0.7, 0.5, Sign::plus) == 1.0);
  CHECK(cs_bound(0.5, 1.0, Sign::minus) == doctest::Approx(0.5).epsilon(1e-15));
  // ordering G- <= G+ on a sweep
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double y = u(rng);
    const double z = std::nextafter(u(rng), 1.0);
    if (z <= 0) continue;
    CHECK(cs_bound(y, z, Sign::minus) <= cs_bound(y, z, Sign::plus));
    CHECK(cs_bound(y, z, Sign::minus) >= 0.0);
    CHECK(cs_bound(y, z, Sign::plus) <= 1.0);
  }
}

TEST_CASE("cs_bound_derivative values and endpoints") {
  CHECK(cs_bound_derivative(0.5, 1.0, Sign::minus) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cs_bound_derivative(0.2, 0.5, Sign::minus) == 0.0);
  CHECK(cs_bound_derivative(0.25, 0.75, Sign::plus) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(cs_bound_derivative(0.0, 0.5, Sign::plus), std::domain_error);
  CHECK_THROWS_AS(cs_bound_derivative(1.0, 0.5, Sign::plus), std::domain_error);
}

TEST_CASE("derivative matches finite differences away from breakpoints") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    const double y = 1e-3 + 0.998 * u(rng);
    const double z = 1e-3 + 0.999 * u(rng);
    // skip the breakpoint neighbourhoods where the FD stencil straddles a kink
    if (std::abs(y - (1 - z)) < 1e-4 || std::abs(y - z) < 1e-4) continue;
    for (Sign s : {Sign::minus, Sign::plus}) {
      CHECK(std::abs(cs_bound_derivative(y, z, s) - fd_derivative(y, z, s)) <= 1e-5);
    }
    ++checked;
  }
}

TEST_CASE("envelope symmetry g(1-y) = 1 - g_opp(y)") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double y = u(rng);
    const double z = 1e-6 + (1 - 1e-6) * u(rng);
    CHECK(cs_envelope(1 - y, z, Sign::plus) ==
          doctest::Approx(1 - cs_envelope(y, z, Sign::minus)).epsilon(1e-12));
    CHECK(cs_envelope(1 - y, z, Sign::minus) ==
          doctest::Approx(1 - cs_envelope(y, z, Sign::plus)).epsilon(1e-12));
  }
}

TEST_CASE("tangent validity over random triples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double ref = 1e-6 + (1 - 2e-6) * u(rng);
    const double y = 1e-9 + (1 - 2e-9) * u(rng);
    const double z = std::min(1.0, 1e-6 + u(rng));
    const TangentPair t = linearize(ref, OverlapBound{z});
    if (t.lower.intercept + t.lower.slope * y > cs_bound(y, z, Sign::minus) + 1e-12) ++violations;
    if (t.upper.intercept + t.upper.slope * y < cs_bound(y, z, Sign::plus) - 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("linearize special cases") {
  // overlap 1 collapses both tangents to the identity
  TangentPair t = linearize(0.3, OverlapBound{1.0});
  CHECK(t.lower.intercept == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t.lower.slope == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.upper.intercept == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t.upper.slope == doctest::Approx(1.0).epsilon(1e-15));
  // zero branch of G-
  t = linearize(0.2, OverlapBound{0.5});
  CHECK(t.lower.intercept == 0.0);
  CHECK(t.lower.slope == 0.0);
  // derived from the envelope/derivative examples
  t = linearize(0.25, OverlapBound{0.75});
  CHECK(t.upper.intercept == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t.upper.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(linearize(0.0, OverlapBound{0.5}), std::domain_error);
  CHECK_THROWS_AS(linearize(1.0, OverlapBound{0.5}), std::domain_error);
  CHECK_THROWS_AS(linearize(1e-13, OverlapBound{0.5}), std::domain_error);
}

TEST_CASE("model-independent overlap: collapse, frozen value, monotonicity") {
  // delta_max = 0 gives exactly 1 for every n, xi
  for (int n : {0, 1, 5})
    for (int xi : {0, 1, 7})
      CHECK(overlap_model_independent(0.5, 0.2, n, xi, cfg_with(0.0)).value == 1.0);

  // xi = 0 removes the bracket; value computed with 40-digit arithmetic
  ProtocolConfig c = cfg_with(0.01, 0.98, 0.01, 0.01);
  CHECK(overlap_model_independent(0.5, 0.2, 1, 0, c).value ==
        doctest::Approx(0.9743337904182103).epsilon(1e-14));

  // non-increasing in xi, delta_max; non-increasing in n for n >= 1
  double prev = 2;
  for (int xi : {0, 1, 2, 5, 9}) {
    const double v = overlap_model_independent(0.5, 0.2, 1, xi, c).value;
    CHECK(v < prev);
    CHECK(v > 0);
    prev = v;
  }
  prev = 2;
  for (double d : {1e-6, 1e-4, 1e-2}) {
    const double v = overlap_model_independent(0.5, 0.2, 1, 2, cfg_with(d, 0.98, 0.01, 0.01)).value;
    CHECK(v < prev);
    prev = v;
  }
  prev = 2;
  for (int n = 1; n <= 12; ++n) {
    const double v = overlap_model_independent(0.5, 0.2, n, 1, c).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("overlap domain errors") {
  ProtocolConfig c = cfg_with(0.01);
  CHECK_THROWS_AS(overlap_model_independent(0.5, 0.5, 1, 1, c), std::domain_error);
  CHECK_THROWS_AS(overlap_model_independent(0.5, 0.2, 1, 1, cfg_with(0.01, 1, 0, 0, 0.999)),
                  std::domain_error);
  CHECK_THROWS_AS(overlap_model_independent(0.5, 0.0, 1, 1, c), std::domain_error);
  CHECK_NOTHROW(overlap_model_independent(0.5, 0.0, 0, 1, c));
  CHECK_THROWS_AS(overlap_deterministic(0.2, 0.2, 0, 1, c), std::domain_error);
}

TEST_CASE("deterministic overlap: collapse, frozen value, dominance") {
  for (int n : {0, 3})
    for (int xi : {1, 4})
      CHECK(overlap_deterministic(0.5, 0.2, n, xi, cfg_with(0.0)).value == 1.0);

  ProtocolConfig c = cfg_with(0.01, 0.98, 0.01, 0.01);
  CHECK(overlap_deterministic(0.5, 0.2, 0, 1, c).value ==
        doctest::Approx(0.9860490281538716).epsilon(1e-14));

  // observed dominance gamma >= tau at configured parameter points
  for (double d : {1e-6, 1e-4, 1e-2})
    for (int n : {0, 1, 2, 5})
      for (int xi : {1, 2, 5}) {
        ProtocolConfig cc = cfg_with(d, 0.98, 0.01, 0.01);
        CHECK(overlap_deterministic(0.5, 0.2, n, xi, cc).value >=
              overlap_model_independent(0.5, 0.2, n, xi, cc).value);
      }
}

TEST_CASE("trace distance halfwidth") {
  CHECK(trace_distance_halfwidth(OverlapBound{1.0}) == 0.0);
  CHECK(trace_distance_halfwidth(OverlapBound{0.75}) == doctest::Approx(0.5).epsilon(1e-15));
  const auto ov = overlap_model_independent(0.5, 0.2, 1, 1, cfg_with(0.01, 0.98, 0.01, 0.01));
  const double w = trace_distance_halfwidth(ov);
  CHECK(w > 0.0);
  CHECK(w < 1.0);
  CHECK_THROWS_AS(trace_distance_halfwidth(OverlapBound{0.0}), std::domain_error);
}
