#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxama/oracle.hpp"

namespace proxama::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitIo = 2,
  kExitConfig = 3,
  kExitData = 4,
  kExitParse = 5,
};

/// Maps a library exception to the documented exit code.
int exit_code_for(const std::exception& e);

/// PROXAMA_SEED when set (ConfigError if not an unsigned integer), else 42.
std::uint64_t default_seed();

struct TvOptions {
  std::string input;
  bool synthetic = false;
  int size = 64;
  std::string variant = "both";  // aniso | iso | both
  std::string algo = "both";     // ama | proximal-ama | both
  double lambda = 5e-5;
  double c = 2.0 - 1e-7;
  double sigma = 0.0;  // 0 selects 1 / (8.00001 c)
  double epsilon = 1e-9;
  long max_iter = 500;
  double tol = 0.0;
  int blur_size = 9;
  double blur_std = 4.0;
  double noise = 1e-3;
  std::string init = "observed";  // observed | zero
  int inner_iters = 200;
  double inner_tol = 1e-8;
  std::uint64_t seed = 42;
  std::string out = ".";
  bool plot = false;
};

struct SvmOptions {
  std::string train;
  std::string test;
  bool synthetic = false;
  int n_train = 200;
  int n_test = 100;
  std::string preset;  // table1 | table2
  double C = 1.0;
  double sigma = 0.2;
  double tau = 10.0;
  double c = 0.0;  // 0 selects 2 lambda_min / lambda_max^2 - 1e-8
  double epsilon = 1e-9;
  std::string algo = "both";
  long max_iter = 2000;
  double rmse_target = 1e-3;
  std::uint64_t seed = 42;
  std::string out = ".";
  bool plot = false;
};

struct QpOptions {
  std::string problem;
  std::string algo = "proximal-ama";
  double c = 0.0;         // 0 selects gamma / |A|^2
  double m1_alpha = 0.0;  // scaled-identity M1; 0 is the zero metric
  std::string m2 = "induced";  // zero | induced
  double m2_sigma = 0.0;  // 0 selects 1 / (2 c |B|^2)
  double epsilon = 1e-9;
  long max_iter = 5000;
  double tol = 1e-8;
  std::uint64_t seed = 42;
  std::string out = ".";
  bool plot = false;
};

/// Each command throws library errors; run() turns them into exit codes.
int cmd_tv(const TvOptions& options, std::ostream& out);
int cmd_svm(const SvmOptions& options, std::ostream& out);
int cmd_qp(const QpOptions& options, std::ostream& out);
/// Runs the built-in oracle and property checks; 0 when all pass.
int cmd_check(std::ostream& out);

/// JSON object with dense P, q, Q, r, A, B, b (q, r optional). Matrices are
/// arrays of rows. Throws ParseError on malformed JSON or shapes.
oracle::QuadraticInstance parse_qp_json(const std::string& text);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<CheckResult> property_checks();

/// Entry point for the `proxama` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proxama::cli
