#include "qcorr/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "qcorr/channel.hpp"
#include "qcorr/estimation.hpp"

namespace qcorr {

void SweepSpec::validate() const {
  if (distances_km.empty() || delta_maxes.empty() || xis.empty() || modes.empty() ||
      models.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  if (optimizer.coarse_step <= 0) throw std::invalid_argument("coarse step must be positive");
  if (optimizer.refinements < 0) throw std::invalid_argument("refinements must be >= 0");
  for (double d : delta_maxes)
    if (d < 0) throw std::invalid_argument("delta_max must be >= 0");
  for (int x : xis)
    if (x < 0) throw std::invalid_argument("xi must be >= 0");
}

namespace {

struct Evaluation {
  double rate = -1.0;
  KeyRateResult result;
  bool valid = false;
};

class RateEvaluator {
 public:
  RateEvaluator(const ChannelParams& ch, const ProtocolConfig& cfg_template)
      : ch_(ch), tmpl_(cfg_template), refs_(reference_statistics(cfg_template, ch)) {}

  // Hot path: the Z and X yield LPs coincide under this channel model, and a
  // vanished y1 bound forces key_term = 0, so the error LP is skipped there.
  Evaluation coarse(double mu, double nu) const {
    ProtocolConfig cfg = with(mu, nu);
    const DecoyObservations obs = model_observations(cfg, ch_);
    Evaluation ev;
    const LpSolution sol_z = solve(build_yield_lp(obs, Basis::z, cfg, refs_));
    if (sol_z.status != LpStatus::optimal) return ev;
    SinglePhotonBounds b;
    b.y1_z_low = std::clamp(sol_z.objective, 0.0, 1.0);
    b.y1_x_low = b.y1_z_low;
    if (b.y1_z_low > 0) {
      const LpSolution sol_e = solve(build_error_lp(obs, cfg, refs_));
      if (sol_e.status != LpStatus::optimal) return ev;
      b.h1_up = std::clamp(sol_e.objective, 0.0, 1.0);
    }
    const double mu_lo = cfg.mu * (1 - cfg.delta_max);
    const double mu_hi = cfg.mu * (1 + cfg.delta_max);
    b.z1_rate_low = cfg.q_z * cfg.q_z * cfg.p_mu * mu_lo * std::exp(-mu_lo) * b.y1_z_low;
    b.x1_rate_low = cfg.q_x * cfg.q_x * cfg.p_mu * mu_lo * std::exp(-mu_lo) * b.y1_x_low;
    b.e1_rate_up = cfg.q_x * cfg.q_x * cfg.p_mu * mu_hi * std::exp(-mu_hi) * b.h1_up;
    ev.result = asymptotic_rate(b, obs, cfg, ch_);
    ev.rate = ev.result.rate;
    ev.valid = true;
    return ev;
  }

  // Full three-LP evaluation for the reported winner.
  Evaluation full(double mu, double nu) const {
    ProtocolConfig cfg = with(mu, nu);
    const DecoyObservations obs = model_observations(cfg, ch_);
    Evaluation ev;
    const SinglePhotonBounds b = estimate_with_refs(obs, cfg, refs_);
    ev.result = asymptotic_rate(b, obs, cfg, ch_);
    ev.rate = ev.result.rate;
    ev.valid = true;
    return ev;
  }

  ProtocolConfig with(double mu, double nu) const {
    ProtocolConfig cfg = tmpl_;
    cfg.mu = mu;
    cfg.nu = nu;
    return cfg;
  }

 private:
  const ChannelParams& ch_;
  const ProtocolConfig& tmpl_;
  ReferenceStatistics refs_;
};

}  // namespace

OptimizeResult optimize_intensities(const ChannelParams& ch, const ProtocolConfig& cfg_template,
                                    const OptimizerSettings& settings) {
  const double omega = cfg_template.omega;
  const double delta = cfg_template.delta_max;
  const double mu_max = settings.resolved_mu_max(delta);
  const double step0 = settings.coarse_step;
  const double nu_min = std::max(2 * omega, 1e-6);
  if (mu_max <= nu_min + step0) throw std::invalid_argument("empty intensity grid");

  RateEvaluator eval(ch, cfg_template);
  OptimizeResult best;
  best.rate.rate = -1.0;
  int evals = 0;
  bool have_any = false;

  auto consider = [&](double mu, double nu) {
    if (!(mu > nu && nu > omega && mu <= mu_max && nu >= nu_min)) return;
    if (!(mu * (1 + delta) < 1)) return;
    const Evaluation ev = eval.coarse(mu, nu);
    ++evals;
    if (!ev.valid) return;
    if (!have_any || ev.rate > best.rate.rate) {
      have_any = true;
      best.mu = mu;
      best.nu = nu;
      best.rate = ev.result;
    }
  };

  for (double mu = nu_min + step0; mu <= mu_max + 1e-12; mu += step0)
    for (double nu = nu_min; nu <= mu - step0 + 1e-12; nu += step0) consider(mu, nu);

  if (!have_any) throw std::runtime_error("no feasible intensity pair on the grid");

  double step = step0;
  for (int r = 0; r < settings.refinements; ++r) {
    const double prev = step;
    step /= 2;
    const double mu0 = best.mu, nu0 = best.nu;
    for (double mu = mu0 - prev; mu <= mu0 + prev + 1e-12; mu += step)
      for (double nu = nu0 - prev; nu <= nu0 + prev + 1e-12; nu += step) {
        if (std::abs(mu - mu0) < 1e-15 && std::abs(nu - nu0) < 1e-15) continue;
        consider(mu, nu);
      }
  }

  // report the winner through the honest three-LP path
  const Evaluation final_ev = eval.full(best.mu, best.nu);
  best.rate = final_ev.result;
  best.evaluations = evals;
  return best;
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const ProtocolConfig& cfg_template,
                            const ChannelParams& base_channel) {
  spec.validate();
  struct Point {
    CorrelationModel model;
    ConstraintMode mode;
    double delta;
    int xi;
    double distance;
  };
  std::vector<Point> grid;
  for (CorrelationModel model : spec.models)
    for (ConstraintMode mode : spec.modes)
      for (double d : spec.delta_maxes)
        for (int xi : spec.xis)
          for (double L : spec.distances_km) grid.push_back({model, mode, d, xi, L});

  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      const Point& p = grid[i];
      SweepRow& row = rows[i];
      row.distance_km = p.distance;
      row.delta_max = p.delta;
      row.xi = p.xi;
      row.mode = p.mode;
      row.model = p.model;
      try {
        ProtocolConfig cfg = cfg_template;
        cfg.delta_max = p.delta;
        cfg.xi = p.xi;
        cfg.constraint_mode = p.mode;
        cfg.correlation_model = p.model;
        ChannelParams ch = base_channel;
        ch.distance_km = p.distance;
        const OptimizeResult res = optimize_intensities(ch, cfg, spec.optimizer);
        row.mu = res.mu;
        row.nu = res.nu;
        row.k_inf = res.rate.rate;
        row.k_raw = res.rate.raw_rate;
        row.key_term = res.rate.key_term;
        row.ec_term = res.rate.ec_term;
        row.ok = true;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.ok = false;
        row.status = e.what();
      }
    }
  };
  unsigned nthreads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads, std::max<std::size_t>(grid.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace qcorr
