#include "qcorr/configfile.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qcorr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': cannot parse number from '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': cannot parse integer from '" + v + "'");
  }
}

void assign(ResolvedConfig& cfg, const std::string& key, const std::string& value) {
  ProtocolConfig& p = cfg.protocol;
  ChannelParams& c = cfg.channel;
  if (key == "mu") p.mu = parse_double(key, value);
  else if (key == "nu") p.nu = parse_double(key, value);
  else if (key == "omega") p.omega = parse_double(key, value);
  else if (key == "p_mu") p.p_mu = parse_double(key, value);
  else if (key == "p_nu") p.p_nu = parse_double(key, value);
  else if (key == "p_omega") p.p_omega = parse_double(key, value);
  else if (key == "q_z") p.q_z = parse_double(key, value);
  else if (key == "q_x") p.q_x = parse_double(key, value);
  else if (key == "delta_max") p.delta_max = parse_double(key, value);
  else if (key == "xi") p.xi = parse_int(key, value);
  else if (key == "n_cut") p.n_cut = parse_int(key, value);
  else if (key == "constraint_mode") p.constraint_mode = constraint_mode_from_string(value);
  else if (key == "correlation_model")
    p.correlation_model = correlation_model_from_string(value);
  else if (key == "eta_det") c.eta_det = parse_double(key, value);
  else if (key == "alpha_att") c.alpha_att = parse_double(key, value);
  else if (key == "distance_km") c.distance_km = parse_double(key, value);
  else if (key == "p_dark") c.p_dark = parse_double(key, value);
  else if (key == "misalignment") c.misalignment = parse_double(key, value);
  else if (key == "f_ec") c.f_ec = parse_double(key, value);
  else if (key == "e_tol") c.e_tol = parse_double(key, value);
  else
    throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

ResolvedConfig parse_config(std::istream& in) {
  ResolvedConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("manifest_", 0) == 0) continue;  // manifests re-parse as configs
    assign(cfg, key, value);
  }
  return cfg;
}

ResolvedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  return parse_config(in);
}

void apply_override(ResolvedConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override '" + assignment + "': expected key=value");
  assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void write_config(const ResolvedConfig& cfg, std::ostream& out) {
  const ProtocolConfig& p = cfg.protocol;
  const ChannelParams& c = cfg.channel;
  const auto old_prec = out.precision(17);
  out << "mu = " << p.mu << "\n"
      << "nu = " << p.nu << "\n"
      << "omega = " << p.omega << "\n"
      << "p_mu = " << p.p_mu << "\n"
      << "p_nu = " << p.p_nu << "\n"
      << "p_omega = " << p.p_omega << "\n"
      << "q_z = " << p.q_z << "\n"
      << "q_x = " << p.q_x << "\n"
      << "delta_max = " << p.delta_max << "\n"
      << "xi = " << p.xi << "\n"
      << "n_cut = " << p.n_cut << "\n"
      << "constraint_mode = " << to_string(p.constraint_mode) << "\n"
      << "correlation_model = " << to_string(p.correlation_model) << "\n"
      << "eta_det = " << c.eta_det << "\n"
      << "alpha_att = " << c.alpha_att << "\n"
      << "distance_km = " << c.distance_km << "\n"
      << "p_dark = " << c.p_dark << "\n"
      << "misalignment = " << c.misalignment << "\n"
      << "f_ec = " << c.f_ec << "\n";
  if (c.e_tol) out << "e_tol = " << *c.e_tol << "\n";
  out.precision(old_prec);
}

RunManifest make_manifest(const ResolvedConfig& cfg, const std::string& command,
                          const std::vector<std::uint64_t>& seeds) {
  RunManifest m;
  m.config = cfg;
  m.command = command;
  m.seeds = seeds;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m.timestamp = buf;
  return m;
}

void write_manifest(const RunManifest& m, std::ostream& out) {
  out << "# resolved run configuration\n";
  write_config(m.config, out);
  out << "manifest_version = " << m.version << "\n"
      << "manifest_timestamp = " << m.timestamp << "\n"
      << "manifest_command = " << m.command << "\n"
      << "manifest_log_base = 2\n"
      << "manifest_p_mu_limit = " << (m.config.protocol.p_mu == 1.0 ? "true" : "false") << "\n";
  if (!m.seeds.empty()) {
    out << "manifest_seeds = ";
    for (std::size_t i = 0; i < m.seeds.size(); ++i) out << (i ? "," : "") << m.seeds[i];
    out << "\n";
  }
}

}  // namespace qcorr
