#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "anfis/anfis.h"

namespace anfis::cli {
namespace {

using nlohmann::json;

// Flat JSON object -> CLI11 config items. Keys are flag names without the
// leading dashes ('_' and '-' are interchangeable). Arrays become repeated
// inputs; arrays of arrays are joined as "a,b;c,d".
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App *, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::parse_error &e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto &[key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        const bool nested = !value.empty() && value.front().is_array();
        if (nested) {
          std::string joined;
          for (std::size_t i = 0; i < value.size(); ++i) {
            if (i) joined += ';';
            for (std::size_t j = 0; j < value[i].size(); ++j) {
              if (j) joined += ',';
              joined += scalar(value[i][j]);
            }
          }
          item.inputs.push_back(joined);
        } else {
          for (const auto &v : value) item.inputs.push_back(scalar(v));
        }
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_object() || v.is_array()) throw CLI::ConversionError("config values must be scalars or lists");
    return v.dump();
  }
};

void add_config(CLI::App *sub) {
  sub->config_formatter(std::make_shared<JsonConfig>());
  sub->set_config("--config", "", "JSON file of flag defaults (keys are flag names)");
}

// Subcommand config files are not read by the parser itself, so they are
// applied here. Flags given on the command line take precedence.
void apply_config(CLI::App *sub) {
  CLI::Option *opt = sub->get_config_ptr();
  if (opt == nullptr || opt->count() == 0) return;
  const auto path = opt->as<std::string>();
  std::vector<CLI::ConfigItem> items;
  try {
    items = JsonConfig{}.from_file(path);
  } catch (const CLI::Error &e) {
    throw UsageError(std::string("--config: ") + e.what(), kExitUsage);
  }
  for (const auto &item : items) {
    CLI::Option *target = sub->get_option_no_throw("--" + item.name);
    if (target == nullptr || target == opt) {
      throw UsageError("--config: unknown key '" + item.name + "'", kExitUsage);
    }
    if (target->count() > 0) continue;
    try {
      for (const auto &input : item.inputs) target->add_result(input);
      target->run_callback();
    } catch (const CLI::Error &e) {
      throw UsageError("--config: " + item.name + ": " + e.what(), kExitUsage);
    }
  }
}

void add_training_flags(CLI::App *sub, TrainingFlags &t) {
  sub->add_option("--epochs", t.epochs, "Hybrid-learning epochs")->capture_default_str();
  sub->add_option("--train-frac", t.train_frac, "Fraction of rows used for training")->capture_default_str();
  sub->add_option("--seed", t.seed, "Seed for the train/test split")->capture_default_str();
  sub->add_option("--initial-step", t.initial_step, "Initial premise step size")->capture_default_str();
  sub->add_option("--step-increase", t.step_increase, "Step growth after 4 straight decreases")
      ->capture_default_str();
  sub->add_option("--step-decrease", t.step_decrease, "Step shrink after 2 oscillations")->capture_default_str();
  sub->add_option("--ridge-lambda", t.ridge_lambda, "Ridge term of the consequent solve")->capture_default_str();
  sub->add_flag("--no-normalize", t.no_normalize, "Train on raw input units (no min-max scaling)");
  sub->add_option("--max-rules", t.max_rules, "Largest rule base allowed")
      ->envname("ANFIS_MAX_RULES")
      ->capture_default_str();
}

std::vector<std::vector<std::string>> parse_input_sets(const std::string &text) {
  std::vector<std::vector<std::string>> sets;
  std::stringstream outer(text);
  std::string group;
  while (std::getline(outer, group, ';')) {
    std::vector<std::string> names;
    std::stringstream inner(group);
    std::string name;
    while (std::getline(inner, name, ',')) {
      if (!name.empty()) names.push_back(name);
    }
    if (names.empty()) throw UsageError("--input-sets: empty input set in '" + text + "'");
    sets.push_back(std::move(names));
  }
  if (sets.empty()) throw UsageError("--input-sets: no input sets given");
  return sets;
}

void require(const std::string &value, const char *flag) {
  if (value.empty()) throw UsageError(std::string("missing ") + flag);
}

}  // namespace

std::string Command::subcommand() const {
  static const char *const names[] = {"gen", "train", "eval", "predict", "sweep"};
  return names[args.index()];
}

Command parse_args(const std::vector<std::string> &argv) {
  CLI::App app{"ANFIS surrogate modelling of bubble-column pressure gradients", "anfis-cli"};
  app.require_subcommand(1, 1);

  GenArgs gen;
  auto *gen_cmd = app.add_subcommand("gen", "Generate the analytic surrogate dataset as CSV");
  gen_cmd->add_option("--out", gen.out, "Output CSV path");
  gen_cmd->add_flag("--midpoints", gen.midpoints, "Emit noiseless grid-midpoint query points instead");
  gen_cmd->add_option("--n-r", gen.n_r, "Radial nodes")->capture_default_str();
  gen_cmd->add_option("--n-theta", gen.n_theta, "Azimuthal nodes")->capture_default_str();
  gen_cmd->add_option("--n-z", gen.n_z, "Axial nodes")->capture_default_str();
  gen_cmd->add_option("--velocities", gen.velocities, "Superficial gas velocities, m/s (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  gen_cmd->add_option("--radius", gen.radius, "Column radius, m")->capture_default_str();
  gen_cmd->add_option("--height", gen.height, "Column height, m")->capture_default_str();
  gen_cmd->add_option("--v-ref", gen.v_ref, "Reference superficial velocity, m/s")->capture_default_str();
  gen_cmd->add_option("--eps0", gen.eps0, "Peak gas holdup at the reference velocity")->capture_default_str();
  gen_cmd->add_option("--exponent", gen.exponent, "Holdup velocity exponent")->capture_default_str();
  gen_cmd->add_option("--rho-liquid", gen.rho_liquid, "Liquid density, kg/m^3")->capture_default_str();
  gen_cmd->add_option("--rho-gas", gen.rho_gas, "Gas density, kg/m^3")->capture_default_str();
  gen_cmd->add_option("--gravity", gen.gravity, "Gravitational acceleration, m/s^2")->capture_default_str();
  gen_cmd->add_option("--noise-sd", gen.noise_sd, "Gaussian noise on dpdz, Pa/m")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
  gen_cmd->footer("Defaults give 10 x 12 x 10 x 5 = 6000 rows.");
  add_config(gen_cmd);

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train an ANFIS model with hybrid learning");
  train_cmd->add_option("--data", train.data, "Dataset CSV");
  train_cmd->add_option("--model-out", train.model_out, "Model file to write")->capture_default_str();
  train_cmd->add_option("--trace-out", train.trace_out, "Optional per-epoch trace CSV");
  train_cmd->add_option("--inputs", train.inputs, "Input columns (comma list)")->delimiter(',')->capture_default_str();
  train_cmd->add_option("--output-col", train.output_col, "Output column")->capture_default_str();
  train_cmd->add_option("--mf-count", train.mf_count, "Membership functions per input")->capture_default_str();
  train_cmd->add_option("--mf-type", train.mf_type, "gbell, gauss, gauss2, dsig, psig or tri")
      ->capture_default_str();
  add_training_flags(train_cmd, train.training);
  add_config(train_cmd);

  EvalArgs eval;
  double eval_frac = 0.0;
  std::uint64_t eval_seed = 0;
  auto *eval_cmd = app.add_subcommand("eval", "Score a model on the held-out and combined rows of a dataset");
  eval_cmd->add_option("--model", eval.model, "Model file");
  eval_cmd->add_option("--data", eval.data, "Dataset CSV the model was trained from");
  eval_cmd->add_option("--predictions-out", eval.predictions_out, "Optional CSV of predictions for every row");
  auto *frac_opt = eval_cmd->add_option("--train-frac", eval_frac, "Split fraction (default: from the model)");
  auto *seed_opt = eval_cmd->add_option("--seed", eval_seed, "Split seed (default: from the model)");
  add_config(eval_cmd);

  PredictArgs predict;
  auto *predict_cmd = app.add_subcommand("predict", "Predict the output at arbitrary (meshless) query points");
  predict_cmd->add_option("--model", predict.model, "Model file");
  predict_cmd->add_option("--points", predict.points, "CSV containing the model's input columns");
  predict_cmd->add_option("--out", predict.out, "Output CSV (inputs + prediction)");
  add_config(predict_cmd);

  SweepArgs sweep;
  std::string input_sets_text = "x;x,y;x,y,z;x,y,z,v_as";
  auto *sweep_cmd = app.add_subcommand("sweep", "Sensitivity study over inputs, MF count and MF family");
  sweep_cmd->add_option("--data", sweep.data, "Dataset CSV");
  sweep_cmd->add_option("--out", sweep.out, "Report CSV to write");
  sweep_cmd->add_option("--summary-out", sweep.summary_out, "Optional trend summary JSON");
  sweep_cmd->add_option("--input-sets", input_sets_text, "Input sets, ';' between sets, ',' within")
      ->capture_default_str();
  sweep_cmd->add_option("--mf-counts", sweep.mf_counts, "MF counts (comma list)")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--mf-types", sweep.mf_types, "MF families (comma list)")->delimiter(',')->capture_default_str();
  sweep_cmd->add_flag("--reference-matrix", sweep.reference_matrix, "Run 6 MFs only for one- and two-input sets");
  sweep_cmd->add_option("--output-col", sweep.output_col, "Output column")->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Cells trained concurrently")->capture_default_str();
  sweep_cmd->add_flag("--timing", sweep.timing, "Fill the wall_time_s column (breaks byte-identical reruns)");
  add_training_flags(sweep_cmd, sweep.training);
  sweep_cmd->footer("Sweeps default to 100 epochs; pass --epochs 700 for the full schedule.");
  add_config(sweep_cmd);

  std::vector<const char *> raw;
  raw.reserve(argv.size());
  for (const auto &a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError &e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    if (code == static_cast<int>(CLI::ExitCodes::Success)) throw UsageError(out.str(), kExitOk);
    std::string message = err.str();
    if (message.empty()) message = e.what();
    throw UsageError(message, kExitUsage);
  }

  for (CLI::App *sub : {gen_cmd, train_cmd, eval_cmd, predict_cmd, sweep_cmd}) {
    if (*sub) apply_config(sub);
  }

  Command cmd;
  if (*gen_cmd) {
    require(gen.out, "--out");
    cmd.args = gen;
  } else if (*train_cmd) {
    require(train.data, "--data");
    require(train.model_out, "--model-out");
    if (train.inputs.empty()) throw UsageError("missing --inputs");
    cmd.args = train;
  } else if (*eval_cmd) {
    require(eval.model, "--model");
    require(eval.data, "--data");
    if (frac_opt->count() > 0) eval.train_frac = eval_frac;
    if (seed_opt->count() > 0) eval.seed = eval_seed;
    cmd.args = eval;
  } else if (*predict_cmd) {
    require(predict.model, "--model");
    require(predict.points, "--points");
    require(predict.out, "--out");
    cmd.args = predict;
  } else {
    require(sweep.data, "--data");
    require(sweep.out, "--out");
    sweep.input_sets = parse_input_sets(input_sets_text);
    if (sweep.mf_counts.empty()) throw UsageError("missing --mf-counts");
    if (sweep.mf_types.empty()) throw UsageError("missing --mf-types");
    if (sweep.mf_types.size() == 1 && sweep.mf_types[0] == "all") {
      sweep.mf_types = SweepArgs{}.mf_types;
    }
    cmd.args = sweep;
  }
  return cmd;
}

// ---------------------------------------------------------------------------
// Execution through the C API

namespace {

class RuntimeFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(anfis_status status, const std::string &context) {
  if (status != ANFIS_OK) {
    throw RuntimeFailure(context + ": " + anfis_status_name(status) + ": " + anfis_last_error());
  }
}

struct DatasetDeleter {
  void operator()(anfis_dataset *p) const { anfis_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(anfis_model *p) const { anfis_model_free(p); }
};
struct TraceDeleter {
  void operator()(anfis_trace *p) const { anfis_trace_free(p); }
};
struct ReportDeleter {
  void operator()(anfis_sweep_report *p) const { anfis_sweep_report_free(p); }
};
using DatasetPtr = std::unique_ptr<anfis_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<anfis_model, ModelDeleter>;
using TracePtr = std::unique_ptr<anfis_trace, TraceDeleter>;
using ReportPtr = std::unique_ptr<anfis_sweep_report, ReportDeleter>;

DatasetPtr load_dataset(const std::string &path) {
  anfis_dataset *ds = nullptr;
  check(anfis_dataset_load_csv(path.c_str(), &ds), "loading " + path);
  return DatasetPtr(ds);
}

ModelPtr load_model(const std::string &path) {
  anfis_model *m = nullptr;
  check(anfis_model_load(path.c_str(), &m), "loading " + path);
  return ModelPtr(m);
}

json metrics_json(const anfis_metrics &m) {
  return {{"r2_determination", m.r2_determination},
          {"r2_pearson", m.r2_pearson},
          {"rmse", m.rmse},
          {"mae", m.mae},
          {"n", m.n}};
}

anfis_train_config to_config(const TrainingFlags &t) {
  anfis_train_config c;
  anfis_train_config_default(&c);
  c.epochs = t.epochs;
  c.initial_step = t.initial_step;
  c.step_increase = t.step_increase;
  c.step_decrease = t.step_decrease;
  c.ridge_lambda = t.ridge_lambda;
  c.seed = t.seed;
  c.normalize_inputs = t.no_normalize ? 0 : 1;
  return c;
}

int run_gen(const GenArgs &a) {
  anfis_grid_spec grid;
  anfis_grid_spec_default(&grid);
  grid.n_r = a.n_r;
  grid.n_theta = a.n_theta;
  grid.n_z = a.n_z;
  grid.velocities = a.velocities.data();
  grid.n_velocities = a.velocities.size();
  anfis_surrogate_params p;
  anfis_surrogate_params_default(&p);
  p.radius = a.radius;
  p.height = a.height;
  p.v_ref = a.v_ref;
  p.eps0 = a.eps0;
  p.exponent = a.exponent;
  p.rho_liquid = a.rho_liquid;
  p.rho_gas = a.rho_gas;
  p.gravity = a.gravity;
  p.noise_sd = a.noise_sd;
  p.seed = a.seed;

  anfis_dataset *raw = nullptr;
  if (a.midpoints) {
    check(anfis_dataset_generate_midpoints(&grid, &p, &raw), "generating midpoints");
  } else {
    check(anfis_dataset_generate(&grid, &p, &raw), "generating surrogate");
  }
  DatasetPtr ds(raw);
  check(anfis_dataset_write_csv(ds.get(), a.out.c_str()), "writing " + a.out);

  const json provenance = {
      {"kind", a.midpoints ? "midpoints" : "surrogate"},
      {"rows", anfis_dataset_rows(ds.get())},
      {"columns", anfis_dataset_cols(ds.get())},
      {"grid", {{"n_r", a.n_r}, {"n_theta", a.n_theta}, {"n_z", a.n_z}, {"velocities", a.velocities}}},
      {"surrogate",
       {{"R", a.radius}, {"H", a.height}, {"v_ref", a.v_ref}, {"eps0", a.eps0}, {"exponent", a.exponent},
        {"rho_L", a.rho_liquid}, {"rho_G", a.rho_gas}, {"g", a.gravity}, {"noise_sd", a.noise_sd}, {"seed", a.seed}}}};
  std::cout << provenance.dump() << '\n';
  return kExitOk;
}

int run_train(const TrainArgs &a) {
  auto data = load_dataset(a.data);
  anfis_dataset *train_raw = nullptr;
  anfis_dataset *test_raw = nullptr;
  check(anfis_dataset_split(data.get(), a.training.train_frac, a.training.seed, &train_raw, &test_raw), "splitting");
  DatasetPtr train_set(train_raw), test_set(test_raw);

  std::vector<const char *> inputs;
  for (const auto &s : a.inputs) inputs.push_back(s.c_str());
  anfis_model_spec spec{inputs.data(), inputs.size(), a.output_col.c_str(), a.mf_count, a.mf_type.c_str(),
                        a.training.max_rules};
  const auto config = to_config(a.training);
  anfis_model *model_raw = nullptr;
  anfis_trace *trace_raw = nullptr;
  check(anfis_model_train(train_set.get(), &spec, &config, &model_raw, &trace_raw), "training");
  ModelPtr model(model_raw);
  TracePtr trace(trace_raw);

  const json provenance = {{"dataset_rows", anfis_dataset_rows(data.get())},
                           {"train_rows", anfis_dataset_rows(train_set.get())},
                           {"test_rows", anfis_dataset_rows(test_set.get())},
                           {"train_frac", a.training.train_frac},
                           {"split_seed", a.training.seed},
                           {"mf_count", a.mf_count},
                           {"data_file", a.data}};
  check(anfis_model_provenance_merge(model.get(), provenance.dump().c_str()), "recording provenance");
  check(anfis_model_save(model.get(), a.model_out.c_str()), "writing " + a.model_out);
  if (!a.trace_out.empty()) check(anfis_trace_write_csv(trace.get(), a.trace_out.c_str()), "writing trace");

  anfis_metrics train_m{};
  check(anfis_model_evaluate(model.get(), train_set.get(), &train_m), "scoring training rows");
  std::cout << json{{"model", a.model_out},
                    {"rules", anfis_model_rule_count(model.get())},
                    {"best_epoch", anfis_trace_best_epoch(trace.get())},
                    {"train", metrics_json(train_m)}}
                   .dump()
            << '\n';
  return kExitOk;
}

int run_eval(const EvalArgs &a) {
  auto model = load_model(a.model);
  auto data = load_dataset(a.data);
  const json provenance = json::parse(anfis_model_provenance_json(model.get()));
  const double frac = a.train_frac.value_or(provenance.value("train_frac", 0.7));
  const std::uint64_t seed = a.seed.value_or(provenance.value("split_seed", std::uint64_t{0}));

  anfis_dataset *train_raw = nullptr;
  anfis_dataset *test_raw = nullptr;
  check(anfis_dataset_split(data.get(), frac, seed, &train_raw, &test_raw), "splitting");
  DatasetPtr train_set(train_raw), test_set(test_raw);

  anfis_metrics train_m{}, test_m{}, all_m{};
  check(anfis_model_evaluate(model.get(), train_set.get(), &train_m), "scoring training rows");
  check(anfis_model_evaluate(model.get(), test_set.get(), &test_m), "scoring held-out rows");
  check(anfis_model_evaluate(model.get(), data.get(), &all_m), "scoring all rows");
  if (!a.predictions_out.empty()) {
    check(anfis_model_predict_csv(model.get(), a.data.c_str(), a.predictions_out.c_str()), "writing predictions");
  }

  std::cout << "metric,value\n"
            << "n_train," << train_m.n << '\n'
            << "n_test," << test_m.n << '\n'
            << "r2_train," << train_m.r2_determination << '\n'
            << "r2_test," << test_m.r2_determination << '\n'
            << "r2_combined," << all_m.r2_determination << '\n'
            << "r2_pearson_test," << test_m.r2_pearson << '\n'
            << "r2_pearson_combined," << all_m.r2_pearson << '\n'
            << "rmse_train," << train_m.rmse << '\n'
            << "rmse_test," << test_m.rmse << '\n'
            << "rmse_combined," << all_m.rmse << '\n'
            << "mae_test," << test_m.mae << '\n';
  return kExitOk;
}

int run_predict(const PredictArgs &a) {
  auto model = load_model(a.model);
  check(anfis_model_predict_csv(model.get(), a.points.c_str(), a.out.c_str()), "predicting " + a.points);
  return kExitOk;
}

int run_sweep(const SweepArgs &a) {
  auto data = load_dataset(a.data);
  const auto config = to_config(a.training);
  json spec = {{"input_sets", a.input_sets},
               {"mf_counts", a.mf_counts},
               {"families", a.mf_types},
               {"output_name", a.output_col},
               {"train",
                {{"epochs", config.epochs},
                 {"initial_step", config.initial_step},
                 {"step_increase", config.step_increase},
                 {"step_decrease", config.step_decrease},
                 {"ridge_lambda", config.ridge_lambda},
                 {"seed", config.seed},
                 {"normalize_inputs", config.normalize_inputs != 0}}},
               {"train_frac", a.training.train_frac},
               {"split_seed", a.training.seed},
               {"max_rules", a.training.max_rules}};
  if (a.reference_matrix) spec["mf_counts_by_size"] = {{"3", {2, 4}}, {"4", {2, 4}}};

  anfis_sweep_report *raw = nullptr;
  check(anfis_sweep_run(data.get(), spec.dump().c_str(), a.jobs, &raw), "running sweep");
  ReportPtr report(raw);
  check(anfis_sweep_report_write_csv(report.get(), a.out.c_str(), a.timing ? 1 : 0), "writing " + a.out);

  const char *summary = nullptr;
  check(anfis_sweep_report_summary_json(report.get(), &summary), "summarising sweep");
  if (!a.summary_out.empty()) {
    std::ofstream out(a.summary_out, std::ios::binary | std::ios::trunc);
    out << summary << '\n';
    if (!out) throw RuntimeFailure("cannot write " + a.summary_out);
  }
  std::cout << summary << '\n';
  return kExitOk;
}

}  // namespace

int execute(const Command &cmd) {
  try {
    return std::visit(
        [](const auto &a) -> int {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, GenArgs>) return run_gen(a);
          else if constexpr (std::is_same_v<T, TrainArgs>) return run_train(a);
          else if constexpr (std::is_same_v<T, EvalArgs>) return run_eval(a);
          else if constexpr (std::is_same_v<T, PredictArgs>) return run_predict(a);
          else return run_sweep(a);
        },
        cmd.args);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run(int argc, const char *const *argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return execute(parse_args(args));
  } catch (const UsageError &e) {
    if (e.exit_code() == kExitOk) {
      std::cout << e.what();
    } else {
      std::cerr << e.what();
      if (std::string_view(e.what()).empty() || std::string_view(e.what()).back() != '\n') std::cerr << '\n';
    }
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace anfis::cli
