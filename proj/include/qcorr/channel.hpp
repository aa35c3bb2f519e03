#pragma once

#include <Eigen/Core>

#include "qcorr/config.hpp"

namespace qcorr {

struct IntensityInterval {
  double low = 0.0;
  double high = 0.0;
};

/// [a(1-delta_max), a(1+delta_max)], the support of the emitted intensity.
IntensityInterval intensity_interval(double a, double delta_max);

/// Record-independent bounds on the photon-number probability p(n|a):
/// [e^{-a+}, e^{-a-}] for n = 0, [e^{-a-}a-^n/n!, e^{-a+}a+^n/n!] for n >= 1.
struct PhotonInterval {
  double low = 0.0;
  double high = 0.0;
};
PhotonInterval photon_number_interval(double a, int n, double delta_max);

/// Probability mass above n_cut at the interval's upper intensity endpoint,
/// summed as the explicit upper series (1 - cumsum underflows to 0 for small
/// intensities, which would collapse the decoy inequality pair to a float
/// equality).
double poisson_upper_tail(double intensity, int n_cut);

/// Normalized expected gain <Zbar_a>/(q_z^2 p_a) = 1 - (1-p_d)^2 e^{-eta a}.
double expected_gain(double a, const ChannelParams& ch);

/// Normalized expected error count <Ebar_a>/(q_x^2 p_a), misalignment plus
/// dark counts with random double-click assignment.
double expected_error(double a, const ChannelParams& ch);

/// Probabilities of the genuine detector outcomes for an n-photon pulse:
/// no click, correct click, error click, double click.
struct OutcomeProbs {
  double none, correct, error, both;
};
OutcomeProbs detector_outcome_probs(int n, double eta, double misalignment);

/// Channel-model reference yields and error probabilities per (n, setting),
/// n = 0..n_cut. The model has no intensity-conditioned detection, so the
/// columns coincide; they are stored per setting to permit future models.
struct ReferenceStatistics {
  Eigen::MatrixXd yields;  // (n_cut+1) x 3
  Eigen::MatrixXd errors;  // (n_cut+1) x 3

  double yield(int n, Setting s) const { return yields(n, static_cast<int>(s)); }
  double error(int n, Setting s) const { return errors(n, static_cast<int>(s)); }
};

/// Throws std::domain_error if any entry falls outside the admissible
/// reference band (p_dark = 0 puts the vacuum yield at exactly 0).
ReferenceStatistics reference_statistics(const ProtocolConfig& cfg, const ChannelParams& ch);

}  // namespace qcorr
