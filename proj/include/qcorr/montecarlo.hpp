#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcorr/config.hpp"
#include "qcorr/estimation.hpp"

namespace qcorr {

enum class SamplerKind { uniform_interval, two_point_extremes, deterministic_memory };
std::string to_string(SamplerKind k);
SamplerKind sampler_kind_from_string(const std::string& s);

/// Intensity correlation model of the simulated source. Every emitted
/// intensity lies in [a_k(1-delta_max), a_k(1+delta_max)] and depends only on
/// the current and previous xi settings.
///  - uniform_interval: uniform over the interval, history-free.
///  - two_point_extremes: one of the two endpoints; the sign follows the most
///    recent previous setting (fair coin when xi = 0 or no history yet).
///  - deterministic_memory: deviation is the mean of the last xi setting
///    values rescaled linearly from [omega, mu] to [-delta_max, +delta_max].
struct CorrelationSampler {
  SamplerKind kind = SamplerKind::uniform_interval;
  double delta_max = 0.0;
  int xi = 0;
};

/// Per-session counts. Photon numbers are tallied up to kMaxPhoton, with an
/// overflow bucket in the last row. Matrices are (kMaxPhoton+1) x 3,
/// columns indexed by Setting.
struct SessionTally {
  static constexpr int kMaxPhoton = 15;
  static constexpr int kBlocks = 32;

  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  ProtocolConfig config;  // snapshot used for normalization
  SamplerKind sampler = SamplerKind::uniform_interval;

  std::array<std::uint64_t, 3> sent{};  // per setting, any basis
  std::array<std::uint64_t, 3> zz_sent{}, zz_click{}, zz_error{};
  std::array<std::uint64_t, 3> xx_sent{}, xx_click{}, xx_error{};

  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 3> emitted;     // any basis
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 3> zz_n_sent, zz_n_click;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 3> xx_n_sent, xx_n_click, xx_n_error;

  // partial Z-basis click counts of the signal setting, for within-run
  // variance diagnostics
  std::array<std::uint64_t, kBlocks> block_zz_click_signal{};

  /// Raw experimental average Zbar_{a,N} = clicks/N (not normalized).
  double zbar(Setting s) const {
    return static_cast<double>(zz_click[static_cast<int>(s)]) / static_cast<double>(rounds);
  }
};

/// Adversary-free correlated-source session. Reproducible from the seed
/// (MT19937-64 with 53-bit uniforms; Poisson by sequential-search inversion;
/// all derived draws are hand-rolled so tallies are platform-stable).
SessionTally simulate(std::uint64_t rounds, const ProtocolConfig& cfg, const ChannelParams& ch,
                      const CorrelationSampler& sampler, std::uint64_t seed);

/// Normalized observations for the estimation module. Combinations whose
/// normalization q^2 p_a vanishes are reported in `missing` and left NaN.
struct ObservationsReport {
  DecoyObservations observations;
  std::vector<std::string> missing;
  bool complete() const { return missing.empty(); }
};
ObservationsReport to_observations(const SessionTally& tally);

/// Tally export, one CSV: totals records per (setting, matched basis) and
/// photon records per (n, setting).
void write_tally_csv(const SessionTally& tally, std::ostream& out);

/// Coverage of the photon-number intervals by the empirical p(n|a),
/// one-sided binomial z-test against the nearest interval endpoint.
struct IntervalCheckRow {
  Setting setting;
  int n;
  double empirical, low, high, z_score;
  bool pass;
};
struct IntervalCheckReport {
  std::vector<IntervalCheckRow> rows;
  bool pass = true;
};
IntervalCheckReport check_interval_coverage(const SessionTally& tally, int max_n = 4,
                                            double z_threshold = 4.0);

/// LP soundness against the simulator's ground truth: y1^L must not exceed
/// the empirical single-photon yield (and h1^U must not undercut the
/// empirical single-photon error) beyond the stated number of binomial
/// standard deviations.
struct SoundnessReport {
  double y1_bound, y1_empirical, y1_z_score;
  double h1_bound, h1_empirical, h1_z_score;
  bool pass;
};
SoundnessReport check_estimation_soundness(const SessionTally& tally, const ChannelParams& ch,
                                           double z_threshold = 4.0);

/// Power-law fit of Var[Zbar_{mu,N}] across seeds versus N. Requires at
/// least 3 distinct round counts with at least 30 seeds each; throws
/// std::invalid_argument otherwise (insufficient replication).
struct VarianceDecayPoint {
  double rounds;
  int seeds;
  double variance;
};
struct VarianceDecayReport {
  std::vector<VarianceDecayPoint> points;
  double exponent = 0.0;   // slope of log Var vs log N
  double intercept = 0.0;
  bool consistent_with_finite_range(double threshold = -0.8) const {
    return exponent <= threshold;
  }
};
VarianceDecayReport variance_decay(const std::vector<std::vector<SessionTally>>& tally_groups);

}  // namespace qcorr
