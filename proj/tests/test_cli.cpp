#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return QCORR_CLI_PATH; }

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path outfile = dir / "cmd.out";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + outfile.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(outfile);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

fs::path write_config(const fs::path& dir, const std::string& extra = "") {
  const fs::path p = dir / "test.cfg";
  std::ofstream f(p);
  f << "mu = 0.5\nnu = 0.17\nomega = 1e-4\ndelta_max = 1e-4\nxi = 1\n"
       "eta_det = 0.65\nalpha_att = 0.2\ndistance_km = 50\np_dark = 7.2e-8\n"
       "misalignment = 0.08\nf_ec = 1.16\n"
    << extra;
  return p;
}

double porcelain_field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(line.substr(pos + key.size() + 1));
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qcorr_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("rate: positive baseline, machine-readable line, exit codes") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path);

  auto r = run("rate -c " + cfg.string() + " --set delta_max=0 --porcelain", tmp.path);
  CHECK(r.exit_code == 0);
  CHECK(porcelain_field(r.out, "rate") > 0.0);
  CHECK(r.out.find("mode=asymptotic") != std::string::npos);

  // config validation failure names the precondition and exits 2
  r = run("rate -c " + cfg.string() + " --set mu=0.99999 --set delta_max=1e-2", tmp.path);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("mu*(1+delta_max)") != std::string::npos);

  r = run("rate -c " + (tmp.path / "missing.cfg").string(), tmp.path);
  CHECK(r.exit_code == 2);

  // trace-distance mode never beats the linearized CS mode
  const auto cs = run("rate -c " + cfg.string() + " --porcelain", tmp.path);
  const auto td = run(
      "rate -c " + cfg.string() + " --set constraint_mode=trace_distance --porcelain", tmp.path);
  CHECK(cs.exit_code == 0);
  CHECK(td.exit_code == 0);
  CHECK(porcelain_field(td.out, "rate") <= porcelain_field(cs.out, "rate") + 1e-12);

  // finite mode reports the extra terms
  r = run("rate -c " + cfg.string() +
              " --set q_z=0.5 --set q_x=0.5 --set p_mu=0.9 --set p_nu=0.06 --set p_omega=0.04"
              " --finite-n 1e12 --porcelain",
          tmp.path);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("mode=finite") != std::string::npos);
  CHECK(porcelain_field(r.out, "serfling") > 0.0);
}

TEST_CASE("sweep: CSV schema, one row per grid point, manifest sidecar") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path);
  const fs::path csv = tmp.path / "sweep.csv";
  const auto r = run("sweep -c " + cfg.string() + " -o " + csv.string() +
                         " --distances 0 --delta-max 1e-4 --xi 1 --coarse-step 0.2"
                         " --refinements 0 --threads 1 --manifest",
                     tmp.path);
  CHECK(r.exit_code == 0);
  std::ifstream in(csv);
  std::string header, row, extra;
  REQUIRE(std::getline(in, header));
  CHECK(header == "L_km,delta_max,xi,mode,model,mu,nu,K_inf,K_raw,key_term,ec_term,status");
  REQUIRE(std::getline(in, row));
  CHECK(row.find("ok") != std::string::npos);
  CHECK_FALSE(std::getline(in, extra));  // exactly one data row
  CHECK(fs::exists(csv.string() + ".manifest"));
  // the manifest is itself a parseable config
  const auto rr = run("rate -c " + csv.string() + ".manifest --porcelain", tmp.path);
  CHECK(rr.exit_code == 0);
}

TEST_CASE("simulate: checks pass, deterministic output, replication guard") {
  TempDir tmp;
  const fs::path cfg = write_config(
      tmp.path,
      "omega = 0.01\nmisalignment = 0.3\np_mu = 0.5\np_nu = 0.25\np_omega = 0.25\n"
      "q_z = 0.5\nq_x = 0.5\n");
  const fs::path base = tmp.path / "tally";
  const std::string common = "simulate -c " + cfg.string() + " --set distance_km=10 --n 1000000 " +
                             "--seeds 7 --sampler uniform_interval -o " + base.string();
  const auto r1 = run(common, tmp.path);
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("[PASS] interval coverage") != std::string::npos);
  CHECK(r1.out.find("[PASS] estimation soundness") != std::string::npos);

  // bit-identical rerun
  std::ifstream f1(base.string() + "_N1000000_s7.csv");
  std::stringstream s1;
  s1 << f1.rdbuf();
  const auto r2 = run(common, tmp.path);
  CHECK(r2.exit_code == 0);
  std::ifstream f2(base.string() + "_N1000000_s7.csv");
  std::stringstream s2;
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());

  // insufficient replication for a variance check is a usage error
  const auto r3 =
      run("simulate -c " + cfg.string() + " --n 100 --seeds 1 --check-variance", tmp.path);
  CHECK(r3.exit_code == 2);
  CHECK(r3.out.find("insufficient replication") != std::string::npos);
}
