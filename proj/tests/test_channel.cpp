#include <doctest.h>

#include <cmath>

#include "qcorr/channel.hpp"

using namespace qcorr;

namespace {
ChannelParams paper_channel(double L) {
  ChannelParams ch;
  ch.distance_km = L;
  return ch;  // defaults are the experimental parameter set
}

// base-4 enumeration over per-photon (arrived?, flipped?) outcomes
OutcomeProbs brute_force_outcomes(int n, double eta, double dA) {
  const double s2 = std::sin(dA) * std::sin(dA);
  OutcomeProbs acc{0, 0, 0, 0};
  const long cases = 1L << (2 * n);
  for (long code = 0; code < cases; ++code) {
    double p = 1.0;
    bool correct = false, error = false;
    long c = code;
    for (int k = 0; k < n; ++k, c >>= 2) {
      const bool arrive = c & 1, flip = c & 2;
      p *= (arrive ? eta : 1 - eta) * (flip ? s2 : 1 - s2);
      if (arrive && !flip) correct = true;
      if (arrive && flip) error = true;
    }
    if (correct && error) acc.both += p;
    else if (correct) acc.correct += p;
    else if (error) acc.error += p;
    else acc.none += p;
  }
  return acc;
}
}  // namespace

TEST_CASE("intensity interval") {
  auto [lo, hi] = intensity_interval(0.5, 0.0);
  CHECK(lo == 0.5);
  CHECK(hi == 0.5);
  auto i2 = intensity_interval(0.5, 0.01);
  CHECK(i2.low == doctest::Approx(0.495).epsilon(1e-15));
  CHECK(i2.high == doctest::Approx(0.505).epsilon(1e-15));
  auto i3 = intensity_interval(0.0, 0.01);
  CHECK(i3.low == 0.0);
  CHECK(i3.high == 0.0);
}

TEST_CASE("photon number interval") {
  auto p0 = photon_number_interval(0.5, 0, 0.0);
  CHECK(p0.low == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(p0.low == p0.high);

  auto p1 = photon_number_interval(0.5, 0, 0.01);
  CHECK(p1.low == doctest::Approx(0.6035055754270405).epsilon(1e-14));
  CHECK(p1.high == doctest::Approx(0.6095709072963093).epsilon(1e-14));

  auto p2 = photon_number_interval(0.5, 2, 0.01);
  CHECK(p2.low == doctest::Approx(0.07468005578013909).epsilon(1e-13));
  CHECK(p2.high == doctest::Approx(0.07695450468664051).epsilon(1e-13));

  // vacuum setting degenerates
  auto pv = photon_number_interval(0.0, 0, 0.01);
  CHECK(pv.low == 1.0);
  CHECK(pv.high == 1.0);
  CHECK(photon_number_interval(0.0, 3, 0.01).high == 0.0);

  CHECK_THROWS_AS(photon_number_interval(0.999, 1, 0.01), std::domain_error);

  // pointwise containment of the exact pmf as delta -> 0
  for (int n = 0; n <= 8; ++n) {
    auto p = photon_number_interval(0.5, n, 1e-3);
    const double exact = std::exp(-0.5) * std::pow(0.5, n) / std::tgamma(n + 1.0);
    CHECK(p.low <= exact);
    CHECK(p.high >= exact);
  }
}

TEST_CASE("poisson upper tail stays positive where 1-cumsum underflows") {
  CHECK(poisson_upper_tail(1e-4, 10) > 0.0);
  CHECK(poisson_upper_tail(0.17, 10) > 0.0);
  CHECK(poisson_upper_tail(0.0, 10) == 0.0);
  // agreement with direct summation at a scale where both work
  double direct = 0;
  for (int n = 11; n < 60; ++n)
    direct += std::exp(-0.5) * std::pow(0.5, n) / std::tgamma(n + 1.0);
  CHECK(poisson_upper_tail(0.5, 10) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("expected gain") {
  ChannelParams ch = paper_channel(0);
  ch.p_dark = 0;
  CHECK(expected_gain(0.5, ch) == doctest::Approx(0.2774726463579278).epsilon(1e-14));
  ch.distance_km = 1e7;  // eta -> 0
  CHECK(expected_gain(0.5, ch) <= 1e-30);
  // dark-count floor
  ChannelParams far = paper_channel(1e7);
  const double floor = 1 - (1 - far.p_dark) * (1 - far.p_dark);
  CHECK(expected_gain(0.3, far) >= floor * (1 - 1e-12));
  // monotone in distance
  double prev = 1;
  for (double L : {0., 50., 100., 200.}) {
    const double g = expected_gain(0.5, paper_channel(L));
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("expected error") {
  ChannelParams ch = paper_channel(30);
  ch.p_dark = 0;
  ch.misalignment = 0;
  CHECK(std::abs(expected_error(0.5, ch)) <= 1e-16);
  ChannelParams ch2 = paper_channel(1e7);
  ch2.p_dark = 0;
  CHECK(std::abs(expected_error(0.5, ch2)) <= 1e-12);
  // frozen evaluation at the paper parameters, L = 100
  CHECK(expected_error(0.5, paper_channel(100)) ==
        doctest::Approx(2.07938726557547e-5).epsilon(1e-11));
  CHECK(expected_gain(0.5, paper_channel(100)) ==
        doctest::Approx(0.003244867999463096).epsilon(1e-13));
}

TEST_CASE("detector outcomes: trivial and brute-force cases") {
  auto p = detector_outcome_probs(0, 0.7, 0.08);
  CHECK(p.none == 1.0);
  CHECK(p.correct == 0.0);
  p = detector_outcome_probs(1, 1.0, 0.0);
  CHECK(p.correct == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.none == 0.0);

  for (int n = 0; n <= 6; ++n) {
    auto closed = detector_outcome_probs(n, 0.5, 0.08);
    auto brute = brute_force_outcomes(n, 0.5, 0.08);
    CHECK(closed.none == doctest::Approx(brute.none).epsilon(1e-12));
    CHECK(closed.correct == doctest::Approx(brute.correct).epsilon(1e-12));
    CHECK(closed.error == doctest::Approx(brute.error).epsilon(1e-12));
    CHECK(closed.both == doctest::Approx(brute.both).epsilon(1e-11));
    CHECK(closed.none + closed.correct + closed.error + closed.both ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  // frozen values for n = 2
  auto g2 = detector_outcome_probs(2, 0.5, 0.08);
  CHECK(g2.none == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g2.correct == doctest::Approx(0.7436238380809364).epsilon(1e-13));
  CHECK(g2.error == doctest::Approx(0.003203375549216171).epsilon(1e-13));
  CHECK(g2.both == doctest::Approx(0.003172786369847446).epsilon(1e-12));
}

TEST_CASE("reference statistics") {
  ProtocolConfig cfg;
  ChannelParams ch = paper_channel(50);
  const auto refs = reference_statistics(cfg, ch);
  CHECK(refs.yields.rows() == cfg.n_cut + 1);
  // vacuum yield is the two-detector dark rate
  const double pd = ch.p_dark;
  CHECK(refs.yield(0, Setting::signal) ==
        doctest::Approx(1 - (1 - pd) * (1 - pd)).epsilon(1e-12));
  // columns coincide in this channel model
  CHECK(refs.yield(3, Setting::signal) == refs.yield(3, Setting::vacuum));
  // frozen single-photon error reference at eta = 0.325
  ChannelParams ch0;
  ch0.eta_det = 0.325;
  ch0.distance_km = 0;
  const auto refs0 = reference_statistics(cfg, ch0);
  CHECK(refs0.error(1, Setting::signal) ==
        doctest::Approx(0.0020756266020180867).epsilon(1e-12));

  // p_dark = 0 pushes the vacuum yield to exactly 0 -> rejected
  ChannelParams bad = paper_channel(50);
  bad.p_dark = 0;
  CHECK_THROWS_AS(reference_statistics(cfg, bad), std::domain_error);
}
