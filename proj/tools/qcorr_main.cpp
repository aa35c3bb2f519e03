#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qcorr/configfile.hpp"
#include "qcorr/estimation.hpp"
#include "qcorr/keyrate.hpp"
#include "qcorr/montecarlo.hpp"
#include "qcorr/optimizer.hpp"

namespace {

using namespace qcorr;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitCheckFailed = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  bool manifest = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "configuration file (key = value)")
      ->required();
  cmd->add_option("--set", args.overrides, "override a config key, e.g. --set delta_max=1e-4");
  cmd->add_flag("--manifest", args.manifest, "write a run manifest beside each output");
}

ResolvedConfig resolve(const CommonArgs& args) {
  ResolvedConfig cfg = load_config(args.config_path);
  for (const auto& o : args.overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

void emit_manifest(const CommonArgs& args, const ResolvedConfig& cfg, const std::string& command,
                   const std::string& out_path, const std::vector<std::uint64_t>& seeds = {}) {
  if (!args.manifest) return;
  const RunManifest m = make_manifest(cfg, command, seeds);
  if (out_path.empty()) {
    write_manifest(m, std::cout);
  } else {
    std::ofstream f(out_path + ".manifest");
    if (!f) throw std::invalid_argument("cannot write manifest beside '" + out_path + "'");
    write_manifest(m, f);
  }
}

std::vector<double> parse_grid(const std::string& text) {
  // accepts "a,b,c" or "start:stop:step"
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double start, stop, step;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
      throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
    for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty grid '" + text + "'");
  return out;
}

const char* reason_name(RateReason r) {
  switch (r) {
    case RateReason::ok: return "ok";
    case RateReason::x_bound_zero: return "x_bound_zero";
    case RateReason::entropy_saturated: return "entropy_saturated";
  }
  return "?";
}

int cmd_rate(const CommonArgs& args, double finite_n, const SecurityParams& sec, bool porcelain) {
  const ResolvedConfig cfg = resolve(args);
  const DecoyObservations obs = model_observations(cfg.protocol, cfg.channel);
  const SinglePhotonBounds bounds = estimate(obs, cfg.protocol, cfg.channel);
  const KeyRateResult r =
      finite_n > 0 ? finite_rate(bounds, obs, cfg.protocol, cfg.channel, finite_n, sec)
                   : asymptotic_rate(bounds, obs, cfg.protocol, cfg.channel);
  if (porcelain) {
    std::printf("rate=%.12e raw=%.12e key_term=%.12e ec_term=%.12e ratio=%.12e "
                "serfling=%.12e finite_size=%.12e y1=%.12e y1x=%.12e h1=%.12e e_tol=%.12e "
                "mode=%s reason=%s\n",
                r.rate, r.raw_rate, r.key_term, r.ec_term, r.phase_error_ratio, r.serfling_term,
                r.finite_size_term, bounds.y1_z_low, bounds.y1_x_low, bounds.h1_up, r.e_tol,
                r.finite_mode ? "finite" : "asymptotic", reason_name(r.reason));
  } else {
    std::printf("mode:               %s\n", r.finite_mode ? "finite" : "asymptotic");
    std::printf("secret key rate:    %.9e bits/pulse\n", r.rate);
    std::printf("raw rate:           %.9e\n", r.raw_rate);
    std::printf("key term:           %.9e\n", r.key_term);
    std::printf("EC term:            %.9e\n", r.ec_term);
    if (r.finite_mode) {
      std::printf("serfling term:      %.9e\n", r.serfling_term);
      std::printf("finite-size term:   %.9e\n", r.finite_size_term);
    }
    std::printf("y1 bound (Z/X):     %.9e / %.9e\n", bounds.y1_z_low, bounds.y1_x_low);
    std::printf("h1 bound:           %.9e\n", bounds.h1_up);
    std::printf("phase error ratio:  %.9e (clamped %.9e)\n", r.phase_error_ratio,
                r.phase_error_ratio_clamped);
    std::printf("E_tol:              %.9e\n", r.e_tol);
    std::printf("reason:             %s\n", reason_name(r.reason));
  }
  emit_manifest(args, cfg, "rate", "");
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& out_path, const SweepSpec& spec_in) {
  const ResolvedConfig cfg = resolve(args);
  SweepSpec spec = spec_in;
  if (spec.distances_km.empty()) spec.distances_km = {cfg.channel.distance_km};
  if (spec.delta_maxes.empty()) spec.delta_maxes = {cfg.protocol.delta_max};
  if (spec.xis.empty()) spec.xis = {cfg.protocol.xi};
  spec.validate();

  const std::vector<SweepRow> rows = sweep(spec, cfg.protocol, cfg.channel);

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
  out << "L_km,delta_max,xi,mode,model,mu,nu,K_inf,K_raw,key_term,ec_term,status\n";
  out.precision(12);
  int succeeded = 0;
  for (const auto& r : rows) {
    out << r.distance_km << "," << r.delta_max << "," << r.xi << "," << to_string(r.mode) << ","
        << to_string(r.model) << "," << r.mu << "," << r.nu << "," << r.k_inf << "," << r.k_raw
        << "," << r.key_term << "," << r.ec_term << "," << (r.ok ? "ok" : r.status) << "\n";
    if (r.ok) ++succeeded;
  }
  out.close();
  emit_manifest(args, cfg, "sweep", out_path);
  std::fprintf(stderr, "sweep: %d/%zu rows ok -> %s\n", succeeded, rows.size(), out_path.c_str());
  return succeeded > 0 ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const CommonArgs& args, const std::vector<double>& n_list,
                 const std::vector<std::uint64_t>& seeds, const std::string& sampler_name,
                 const std::string& out_base, bool check_variance) {
  const ResolvedConfig cfg = resolve(args);
  CorrelationSampler sampler;
  sampler.kind = sampler_kind_from_string(sampler_name);
  sampler.delta_max = cfg.protocol.delta_max;
  sampler.xi = cfg.protocol.xi;

  if (check_variance && (n_list.size() < 3 || seeds.size() < 30))
    throw std::invalid_argument(
        "variance decay requires at least 3 round counts and 30 seeds (insufficient "
        "replication)");

  bool all_pass = true;
  std::vector<std::vector<SessionTally>> groups;
  for (double n : n_list) {
    groups.emplace_back();
    for (std::uint64_t seed : seeds) {
      const SessionTally t =
          simulate(static_cast<std::uint64_t>(n), cfg.protocol, cfg.channel, sampler, seed);
      if (!out_base.empty()) {
        std::ostringstream name;
        name << out_base << "_N" << static_cast<std::uint64_t>(n) << "_s" << seed << ".csv";
        std::ofstream f(name.str());
        if (!f) throw std::invalid_argument("cannot write '" + name.str() + "'");
        write_tally_csv(t, f);
      }
      groups.back().push_back(std::move(t));
    }
  }

  // validation report on the first tally of the largest N
  const SessionTally& probe = groups.back().front();
  const IntervalCheckReport ic = check_interval_coverage(probe);
  std::printf("[%s] interval coverage (n <= 4, 4 sigma)\n", ic.pass ? "PASS" : "FAIL");
  all_pass = all_pass && ic.pass;
  try {
    const SoundnessReport sr = check_estimation_soundness(probe, cfg.channel);
    std::printf("[%s] estimation soundness: y1 %.6g <= %.6g (z=%.2f), h1 %.6g >= %.6g (z=%.2f)\n",
                sr.pass ? "PASS" : "FAIL", sr.y1_bound, sr.y1_empirical, sr.y1_z_score,
                sr.h1_bound, sr.h1_empirical, sr.h1_z_score);
    all_pass = all_pass && sr.pass;
  } catch (const estimation_error& e) {
    std::printf("[FAIL] estimation soundness: %s\n", e.what());
    all_pass = false;
  }
  if (check_variance) {
    const VarianceDecayReport vr = variance_decay(groups);
    const bool ok = vr.consistent_with_finite_range();
    std::printf("[%s] variance decay: fitted exponent %.3f (threshold -0.8)\n",
                ok ? "PASS" : "FAIL", vr.exponent);
    for (const auto& p : vr.points)
      std::printf("    N=%.3g seeds=%d Var[Zbar_mu]=%.6e\n", p.rounds, p.seeds, p.variance);
    all_pass = all_pass && ok;
  }
  emit_manifest(args, cfg, "simulate", out_base, seeds);
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decoy-state BB84 key rates under bounded intensity correlations"};
  app.require_subcommand(1);

  CommonArgs rate_args, sweep_args, sim_args;
  double finite_n = 0;
  SecurityParams sec;
  bool porcelain = false;
  CLI::App* rate = app.add_subcommand("rate", "single-point secret key rate");
  add_common(rate, rate_args);
  rate->add_option("--finite-n", finite_n, "finite number of rounds (0 = asymptotic)");
  rate->add_option("--eps-s", sec.eps_s, "Serfling failure probability");
  rate->add_option("--eps-pa", sec.eps_pa, "privacy amplification failure probability");
  rate->add_option("--eps-cor", sec.eps_cor, "correctness parameter");
  rate->add_option("--eps-delta", sec.delta, "smoothing parameter");
  rate->add_flag("--porcelain", porcelain, "single machine-readable output line");

  std::string distances, deltas, xis, modes_csv, models_csv, sweep_out;
  SweepSpec spec;
  CLI::App* sw = app.add_subcommand("sweep", "rate-distance sweep to CSV");
  add_common(sw, sweep_args);
  sw->add_option("-o,--out", sweep_out, "output CSV path")->required();
  sw->add_option("--distances", distances, "km grid: list a,b,c or start:stop:step");
  sw->add_option("--delta-max", deltas, "delta_max list");
  sw->add_option("--xi", xis, "correlation range list");
  sw->add_option("--modes", modes_csv, "constraint modes (cs_linearized,trace_distance)");
  sw->add_option("--models", models_csv, "correlation models (model_independent,deterministic)");
  sw->add_option("--coarse-step", spec.optimizer.coarse_step, "intensity grid step");
  sw->add_option("--refinements", spec.optimizer.refinements, "local refinement stages");
  sw->add_option("--mu-max", spec.optimizer.mu_max, "upper bound of the mu grid");
  sw->add_option("--threads", spec.threads, "worker threads (0 = auto)");

  std::string n_csv = "1000000", seeds_csv = "1", sampler_name = "uniform_interval",
              sim_out;
  bool check_variance = false;
  CLI::App* sim = app.add_subcommand("simulate", "correlated-source Monte Carlo session");
  add_common(sim, sim_args);
  sim->add_option("--n", n_csv, "round counts, comma-separated");
  sim->add_option("--seeds", seeds_csv, "seeds, comma-separated");
  sim->add_option("--sampler", sampler_name,
                  "uniform_interval | two_point_extremes | deterministic_memory");
  sim->add_option("-o,--out", sim_out, "tally CSV base path (one file per run)");
  sim->add_flag("--check-variance", check_variance, "fit the variance-decay exponent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rate->parsed()) return cmd_rate(rate_args, finite_n, sec, porcelain);
    if (sw->parsed()) {
      if (!distances.empty()) spec.distances_km = parse_grid(distances);
      if (!deltas.empty()) spec.delta_maxes = parse_grid(deltas);
      if (!xis.empty())
        for (double x : parse_grid(xis)) spec.xis.push_back(static_cast<int>(x));
      if (!modes_csv.empty()) {
        spec.modes.clear();
        std::stringstream ss(modes_csv);
        std::string m;
        while (std::getline(ss, m, ',')) spec.modes.push_back(constraint_mode_from_string(m));
      }
      if (!models_csv.empty()) {
        spec.models.clear();
        std::stringstream ss(models_csv);
        std::string m;
        while (std::getline(ss, m, ','))
          spec.models.push_back(correlation_model_from_string(m));
      }
      return cmd_sweep(sweep_args, sweep_out, spec);
    }
    if (sim->parsed()) {
      std::vector<std::uint64_t> seeds;
      for (double s : parse_grid(seeds_csv)) seeds.push_back(static_cast<std::uint64_t>(s));
      return cmd_simulate(sim_args, parse_grid(n_csv), seeds, sampler_name, sim_out,
                          check_variance);
    }
  } catch (const estimation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
