// End-to-end checks of the command-line binary: exit codes, printed values,
// and byte-identical artifacts across worker-pool sizes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "htsgd/io.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCliPath = HTSGD_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("htsgd_cli_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(kCliPath) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) { return htsgd::read_file(p.string()); }

const char* kEnsembleConfig = R"(
[problem]
kind = "smooth-nonconvex"
dim = 2
scale = 1.0
[noise]
kind = "power-law"
kappa = 2.5
[nonlinearity]
kind = "sign"
[schedule]
a = 0.5
delta = 0.75
[run]
horizon = 400
[ensemble]
n_trajectories = 6
base_seed = 11
thetas = [0.25]
)";

}  // namespace

TEST_CASE("version prints and exits cleanly") {
  TempDir tmp;
  const int code = run_cli("version", tmp.path / "out.txt");
  CHECK(code == 0);
  CHECK(slurp(tmp.path / "out.txt").find("htsgd") != std::string::npos);
}

TEST_CASE("rates prints the critical-regime coefficient") {
  TempDir tmp;
  const int code = run_cli("rates --delta 0.75 --a 1 --C 1 --L 1 --minab2 1",
                           tmp.path / "out.txt");
  CHECK(code == 0);
  const std::string out = slurp(tmp.path / "out.txt");
  CHECK(out.find("coefficient: 0.0625") != std::string::npos);
  CHECK(out.find("sqrt(t)/ln(t)") != std::string::npos);
}

TEST_CASE("burnin and legendre print values") {
  TempDir tmp;
  CHECK(run_cli("burnin --a 1 --delta 0.7 --beta 1 --C 1 --L 1 --fgap0 1 "
                "--gradsq0 1",
                tmp.path / "b.txt") == 0);
  CHECK(slurp(tmp.path / "b.txt").find("1.9067213785884892e+30") !=
        std::string::npos);
  CHECK(run_cli("legendre --c 1 --x 2", tmp.path / "l.txt") == 0);
  const double legendre = std::stod(slurp(tmp.path / "l.txt"));
  CHECK(std::abs(legendre - 1.0) <= 1e-4);
}

TEST_CASE("unknown config keys exit with code 1 and name the key") {
  TempDir tmp;
  std::ofstream(tmp.path / "bad.cfg")
      << kEnsembleConfig << "\n[noise]\nbogus_key = 1\n";
  const int code = run_cli("ensemble --config " + (tmp.path / "bad.cfg").string(),
                           tmp.path / "out.txt");
  CHECK(code == 1);
  CHECK(slurp(tmp.path / "out.txt").find("noise.bogus_key") !=
        std::string::npos);
}

TEST_CASE("missing config file exits with code 1") {
  TempDir tmp;
  const int code =
      run_cli("run --config /nonexistent.cfg", tmp.path / "out.txt");
  CHECK(code == 1);
}

TEST_CASE("ensemble artifacts are byte-identical across thread counts") {
  TempDir tmp;
  std::ofstream(tmp.path / "exp.cfg") << kEnsembleConfig;
  const std::string cfg = (tmp.path / "exp.cfg").string();
  const fs::path out1 = tmp.path / "run1";
  const fs::path out4 = tmp.path / "run4";
  CHECK(run_cli("ensemble --config " + cfg + " --out " + out1.string() +
                    " --threads 1",
                tmp.path / "log1.txt") == 0);
  CHECK(run_cli("ensemble --config " + cfg + " --out " + out4.string() +
                    " --threads 4",
                tmp.path / "log4.txt") == 0);
  for (const char* name : {"metrics.csv", "tails.csv", "summary.json",
                           "manifest.json"}) {
    CHECK(slurp(out1 / name) == slurp(out4 / name));
  }
}

TEST_CASE("single runs write a trajectory and a manifest") {
  TempDir tmp;
  std::ofstream(tmp.path / "exp.cfg") << kEnsembleConfig;
  const fs::path out = tmp.path / "traj";
  CHECK(run_cli("run --config " + (tmp.path / "exp.cfg").string() + " --out " +
                    out.string(),
                tmp.path / "log.txt") == 0);
  const std::string csv = slurp(out / "trajectory.csv");
  CHECK(csv.rfind("t,eta,N_t,f_gap,grad_norm,G_t,Z_t,X_t,weighted_G,pr_gap",
                  0) == 0);
  CHECK(slurp(out / "manifest.json").find("trajectory.csv") !=
        std::string::npos);
}

TEST_CASE("verify-lemma passes on a conforming configuration") {
  TempDir tmp;
  std::ofstream(tmp.path / "exp.cfg") << R"(
[problem]
kind = "quadratic"
spectrum = [1]
[noise]
kind = "power-law"
kappa = 2.5
[nonlinearity]
kind = "sign"
[schedule]
a = 1.0
delta = 0.75
[run]
horizon = 10
[verify]
n = 100000
radii = [0.1, 1, 10]
)";
  const fs::path out = tmp.path / "lemma";
  const int code = run_cli("verify-lemma --config " +
                               (tmp.path / "exp.cfg").string() + " --out " +
                               out.string(),
                           tmp.path / "log.txt");
  CHECK(code == 0);
  CHECK(slurp(out / "lemma.json").find("\"verdict\": \"pass\"") !=
        std::string::npos);
}

TEST_CASE("audit-noise passes on a conforming configuration") {
  TempDir tmp;
  std::ofstream(tmp.path / "exp.cfg") << R"(
[problem]
kind = "quadratic"
spectrum = [1, 1]
[noise]
kind = "power-law"
kappa = 2.5
[nonlinearity]
kind = "joint-clip"
M = 1.0
[schedule]
a = 1.0
delta = 0.75
[run]
horizon = 10
[audit]
n = 20000
phi_samples = 200000
)";
  const fs::path out = tmp.path / "audit";
  const int code = run_cli("audit-noise --config " +
                               (tmp.path / "exp.cfg").string() + " --out " +
                               out.string(),
                           tmp.path / "log.txt");
  CHECK(code == 0);
  CHECK(slurp(out / "audit.json").find("\"verdict\": \"pass\"") !=
        std::string::npos);
}
