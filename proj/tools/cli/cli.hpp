#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace anfis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct GenArgs {
  std::string out;
  bool midpoints = false;
  int n_r = 10;
  int n_theta = 12;
  int n_z = 10;
  std::vector<double> velocities = {0.0025, 0.005, 0.0075, 0.01, 0.0125};
  double radius = 0.144;
  double height = 2.6;
  double v_ref = 0.005;
  double eps0 = 0.1;
  double exponent = 0.8;
  double rho_liquid = 998.0;
  double rho_gas = 1.2;
  double gravity = 9.81;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

struct TrainingFlags {
  int epochs = 700;
  double initial_step = 0.01;
  double step_increase = 1.1;
  double step_decrease = 0.9;
  double ridge_lambda = 1e-8;
  bool no_normalize = false;
  double train_frac = 0.7;
  std::uint64_t seed = 0;
  std::size_t max_rules = 10000;
};

struct TrainArgs {
  std::string data;
  std::string model_out = "model.json";
  std::string trace_out;
  std::vector<std::string> inputs = {"x", "y", "z", "v_as"};
  std::string output_col = "dpdz";
  int mf_count = 4;
  std::string mf_type = "gbell";
  TrainingFlags training;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string predictions_out;
  std::optional<double> train_frac;  // defaults to the model's provenance
  std::optional<std::uint64_t> seed;
};

struct PredictArgs {
  std::string model;
  std::string points;
  std::string out;
};

struct SweepArgs {
  std::string data;
  std::string out;
  std::string summary_out;
  std::vector<std::vector<std::string>> input_sets = {{"x"}, {"x", "y"}, {"x", "y", "z"}, {"x", "y", "z", "v_as"}};
  std::vector<int> mf_counts = {2, 4, 6};
  std::vector<std::string> mf_types = {"gbell", "gauss", "gauss2", "dsig", "psig", "tri"};
  bool reference_matrix = false;
  std::string output_col = "dpdz";
  unsigned jobs = 1;
  bool timing = false;
  TrainingFlags training{.epochs = 100};
};

struct Command {
  std::variant<GenArgs, TrainArgs, EvalArgs, PredictArgs, SweepArgs> args;

  std::string subcommand() const;
};

/// Bad command line. Carries the exit code to use (2, or 0 for --help).
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string &message, int exit_code = kExitUsage)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// argv[0] is the program name. Throws UsageError; help text is reported as a
/// UsageError with exit code 0.
Command parse_args(const std::vector<std::string> &argv);

/// Runs a parsed command; returns 0 on success and 1 on runtime failure.
int execute(const Command &cmd);

/// parse_args + execute with diagnostics on stderr.
int run(int argc, const char *const *argv);

}  // namespace anfis::cli
