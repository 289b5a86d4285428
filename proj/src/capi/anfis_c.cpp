#include "anfis/anfis.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "anfis/dataset.hpp"
#include "anfis/error.hpp"
#include "anfis/fis.hpp"
#include "anfis/sweep.hpp"
#include "anfis/trainer.hpp"

struct anfis_dataset {
  anfis::Dataset data;
};

struct anfis_model {
  anfis::AnfisModel model;
  mutable std::string scratch;
};

struct anfis_trace {
  anfis::TrainTrace trace;
};

struct anfis_sweep_report {
  anfis::SweepReport report;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

const std::vector<double> kDefaultVelocities = anfis::GridSpec{}.velocities;

anfis_status map_code(anfis::ErrorCode code) {
  using anfis::ErrorCode;
  switch (code) {
    case ErrorCode::parameter_domain: return ANFIS_ERR_PARAMETER_DOMAIN;
    case ErrorCode::configuration: return ANFIS_ERR_CONFIGURATION;
    case ErrorCode::shape: return ANFIS_ERR_SHAPE;
    case ErrorCode::rule_explosion: return ANFIS_ERR_RULE_EXPLOSION;
    case ErrorCode::parse: return ANFIS_ERR_PARSE;
    case ErrorCode::version: return ANFIS_ERR_VERSION;
    case ErrorCode::invariant: return ANFIS_ERR_INVARIANT;
    case ErrorCode::data: return ANFIS_ERR_DATA;
    case ErrorCode::domain: return ANFIS_ERR_DOMAIN;
    case ErrorCode::selection: return ANFIS_ERR_SELECTION;
    case ErrorCode::io: return ANFIS_ERR_IO;
    case ErrorCode::summary: return ANFIS_ERR_SUMMARY;
  }
  return ANFIS_ERR_INTERNAL;
}

anfis_status fail(anfis_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
anfis_status guarded(Fn &&fn) noexcept {
  try {
    fn();
    return ANFIS_OK;
  } catch (const anfis::Error &e) {
    return fail(map_code(e.code()), e.what());
  } catch (const nlohmann::json::exception &e) {
    return fail(ANFIS_ERR_PARSE, e.what());
  } catch (const std::bad_alloc &) {
    return fail(ANFIS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(ANFIS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ANFIS_ERR_INTERNAL, "unknown failure");
  }
}

#define ANFIS_REQUIRE(ptr)                                                        \
  do {                                                                            \
    if (!(ptr)) return fail(ANFIS_ERR_NULL_ARGUMENT, "null argument: " #ptr);     \
  } while (0)

anfis::GridSpec to_cpp(const anfis_grid_spec &g) {
  anfis::GridSpec out;
  out.n_r = g.n_r;
  out.n_theta = g.n_theta;
  out.n_z = g.n_z;
  out.velocities.assign(g.velocities, g.velocities + (g.velocities ? g.n_velocities : 0));
  return out;
}

anfis::SurrogateParams to_cpp(const anfis_surrogate_params &p) {
  anfis::SurrogateParams out;
  out.radius = p.radius;
  out.height = p.height;
  out.v_ref = p.v_ref;
  out.eps0 = p.eps0;
  out.exponent = p.exponent;
  out.rho_liquid = p.rho_liquid;
  out.rho_gas = p.rho_gas;
  out.gravity = p.gravity;
  out.noise_sd = p.noise_sd;
  out.seed = p.seed;
  return out;
}

void from_cpp(const anfis::SurrogateParams &p, anfis_surrogate_params &out) {
  out.radius = p.radius;
  out.height = p.height;
  out.v_ref = p.v_ref;
  out.eps0 = p.eps0;
  out.exponent = p.exponent;
  out.rho_liquid = p.rho_liquid;
  out.rho_gas = p.rho_gas;
  out.gravity = p.gravity;
  out.noise_sd = p.noise_sd;
  out.seed = p.seed;
}

anfis::TrainConfig to_cpp(const anfis_train_config &c) {
  anfis::TrainConfig out;
  out.epochs = c.epochs;
  out.initial_step = c.initial_step;
  out.step_increase = c.step_increase;
  out.step_decrease = c.step_decrease;
  out.ridge_lambda = c.ridge_lambda;
  out.seed = c.seed;
  out.normalize_inputs = c.normalize_inputs != 0;
  return out;
}

void fill_metrics(const anfis::MetricReport &m, anfis_metrics &out) {
  out.r2_determination = m.r2_determination;
  out.r2_pearson = m.r2_pearson;
  out.rmse = m.rmse;
  out.mae = m.mae;
  out.n = m.n;
  out.degenerate = m.degenerate ? 1 : 0;
}

std::vector<std::string> model_input_names(const anfis::AnfisModel &m) {
  std::vector<std::string> names;
  for (const auto &in : m.inputs) names.push_back(in.column_name);
  return names;
}

}  // namespace

extern "C" {

const char *anfis_version(void) { return "1.0.0"; }

const char *anfis_last_error(void) { return g_last_error.c_str(); }

const char *anfis_status_name(anfis_status status) {
  switch (status) {
    case ANFIS_OK: return "ok";
    case ANFIS_ERR_NULL_ARGUMENT: return "null argument";
    case ANFIS_ERR_PARAMETER_DOMAIN: return "parameter-domain error";
    case ANFIS_ERR_CONFIGURATION: return "configuration error";
    case ANFIS_ERR_SHAPE: return "shape error";
    case ANFIS_ERR_RULE_EXPLOSION: return "rule-explosion error";
    case ANFIS_ERR_PARSE: return "parse error";
    case ANFIS_ERR_VERSION: return "version error";
    case ANFIS_ERR_INVARIANT: return "invariant violation";
    case ANFIS_ERR_DATA: return "data error";
    case ANFIS_ERR_DOMAIN: return "domain error";
    case ANFIS_ERR_SELECTION: return "selection error";
    case ANFIS_ERR_IO: return "I/O error";
    case ANFIS_ERR_SUMMARY: return "summary error";
    case ANFIS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- data generation ------------------------------------------------------

void anfis_grid_spec_default(anfis_grid_spec *grid) {
  if (!grid) return;
  const anfis::GridSpec g;
  grid->n_r = g.n_r;
  grid->n_theta = g.n_theta;
  grid->n_z = g.n_z;
  grid->velocities = kDefaultVelocities.data();
  grid->n_velocities = kDefaultVelocities.size();
}

void anfis_surrogate_params_default(anfis_surrogate_params *params) {
  if (params) from_cpp(anfis::SurrogateParams{}, *params);
}

anfis_status anfis_generation_config_parse(const char *json_text, anfis_grid_spec *grid, double *velocity_storage,
                                           size_t velocity_capacity, anfis_surrogate_params *params) {
  ANFIS_REQUIRE(json_text);
  ANFIS_REQUIRE(grid);
  ANFIS_REQUIRE(params);
  return guarded([&] {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_object()) throw anfis::Error(anfis::ErrorCode::parse, "config: expected an object");
    anfis::GridSpec g;
    anfis::SurrogateParams p;
    for (const auto &[key, value] : doc.items()) {
      if (key == "grid") g = anfis::grid_from_json(value);
      else if (key == "surrogate") p = anfis::surrogate_from_json(value);
      else throw anfis::Error(anfis::ErrorCode::parse, "config: unknown field '" + key + "'");
    }
    if (g.velocities.size() > velocity_capacity || !velocity_storage) {
      throw anfis::Error(anfis::ErrorCode::configuration, "config: velocity list exceeds caller storage");
    }
    std::copy(g.velocities.begin(), g.velocities.end(), velocity_storage);
    grid->n_r = g.n_r;
    grid->n_theta = g.n_theta;
    grid->n_z = g.n_z;
    grid->velocities = velocity_storage;
    grid->n_velocities = g.velocities.size();
    from_cpp(p, *params);
  });
}

anfis_status anfis_surrogate_dpdz(double x, double y, double z, double v, const anfis_surrogate_params *params,
                                  double *out) {
  ANFIS_REQUIRE(params);
  ANFIS_REQUIRE(out);
  return guarded([&] {
    auto p = to_cpp(*params);
    anfis::validate(p);
    *out = anfis::surrogate_dpdz(x, y, z, v, p);
  });
}

anfis_status anfis_dataset_generate(const anfis_grid_spec *grid, const anfis_surrogate_params *params,
                                    anfis_dataset **out) {
  ANFIS_REQUIRE(grid);
  ANFIS_REQUIRE(params);
  ANFIS_REQUIRE(out);
  return guarded([&] { *out = new anfis_dataset{anfis::generate_surrogate(to_cpp(*grid), to_cpp(*params))}; });
}

anfis_status anfis_dataset_generate_midpoints(const anfis_grid_spec *grid, const anfis_surrogate_params *params,
                                              anfis_dataset **out) {
  ANFIS_REQUIRE(grid);
  ANFIS_REQUIRE(params);
  ANFIS_REQUIRE(out);
  return guarded([&] { *out = new anfis_dataset{anfis::generate_midpoints(to_cpp(*grid), to_cpp(*params))}; });
}

// ---- datasets ----------------------------------------------------------------

anfis_status anfis_dataset_load_csv(const char *path, anfis_dataset **out) {
  ANFIS_REQUIRE(path);
  ANFIS_REQUIRE(out);
  return guarded([&] { *out = new anfis_dataset{anfis::load_csv(path)}; });
}

anfis_status anfis_dataset_write_csv(const anfis_dataset *ds, const char *path) {
  ANFIS_REQUIRE(ds);
  ANFIS_REQUIRE(path);
  return guarded([&] { anfis::write_csv(ds->data, path); });
}

size_t anfis_dataset_rows(const anfis_dataset *ds) { return ds ? ds->data.rows() : 0; }
size_t anfis_dataset_cols(const anfis_dataset *ds) { return ds ? ds->data.cols() : 0; }

const char *anfis_dataset_column_name(const anfis_dataset *ds, size_t col) {
  if (!ds || col >= ds->data.cols()) return nullptr;
  return ds->data.columns()[col].name.c_str();
}

const char *anfis_dataset_column_unit(const anfis_dataset *ds, size_t col) {
  if (!ds || col >= ds->data.cols()) return nullptr;
  return ds->data.columns()[col].unit.c_str();
}

anfis_status anfis_dataset_value(const anfis_dataset *ds, size_t row, size_t col, double *out) {
  ANFIS_REQUIRE(ds);
  ANFIS_REQUIRE(out);
  if (row >= ds->data.rows() || col >= ds->data.cols()) return fail(ANFIS_ERR_SHAPE, "cell index out of range");
  *out = ds->data.values()(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  return ANFIS_OK;
}

anfis_status anfis_dataset_split(const anfis_dataset *ds, double train_frac, uint64_t seed, anfis_dataset **train,
                                 anfis_dataset **test) {
  ANFIS_REQUIRE(ds);
  ANFIS_REQUIRE(train);
  ANFIS_REQUIRE(test);
  return guarded([&] {
    auto [a, b] = anfis::split(ds->data, train_frac, seed);
    auto *tr = new anfis_dataset{std::move(a)};
    *test = new anfis_dataset{std::move(b)};
    *train = tr;
  });
}

void anfis_dataset_free(anfis_dataset *ds) { delete ds; }

// ---- models -------------------------------------------------------------------

void anfis_train_config_default(anfis_train_config *config) {
  if (!config) return;
  const anfis::TrainConfig c;
  config->epochs = c.epochs;
  config->initial_step = c.initial_step;
  config->step_increase = c.step_increase;
  config->step_decrease = c.step_decrease;
  config->ridge_lambda = c.ridge_lambda;
  config->seed = c.seed;
  config->normalize_inputs = c.normalize_inputs ? 1 : 0;
}

anfis_status anfis_model_train(const anfis_dataset *data, const anfis_model_spec *spec,
                               const anfis_train_config *config, anfis_model **model, anfis_trace **trace) {
  ANFIS_REQUIRE(data);
  ANFIS_REQUIRE(spec);
  ANFIS_REQUIRE(config);
  ANFIS_REQUIRE(model);
  ANFIS_REQUIRE(spec->output);
  ANFIS_REQUIRE(spec->family);
  if (spec->n_inputs > 0) ANFIS_REQUIRE(spec->inputs);
  return guarded([&] {
    std::vector<std::string> inputs;
    for (size_t i = 0; i < spec->n_inputs; ++i) {
      if (!spec->inputs[i]) throw anfis::Error(anfis::ErrorCode::selection, "null input column name");
      inputs.emplace_back(spec->inputs[i]);
    }
    const auto cfg = to_cpp(*config);
    anfis::validate(cfg);
    const auto family = anfis::parse_family(spec->family);
    const auto reg = anfis::select_regression(data->data, inputs, spec->output);
    anfis::BuildOptions opts;
    opts.max_rules = spec->max_rules ? spec->max_rules : anfis::kDefaultMaxRules;
    opts.normalize_inputs = cfg.normalize_inputs;
    auto built = anfis::build_model(reg.inputs, spec->mf_count, family, spec->output, opts);
    auto result = anfis::train(std::move(built), reg.X, reg.y, cfg);
    auto m = std::make_unique<anfis_model>(anfis_model{std::move(result.model), {}});
    if (trace) *trace = new anfis_trace{std::move(result.trace)};
    *model = m.release();
  });
}

anfis_status anfis_model_load(const char *path, anfis_model **out) {
  ANFIS_REQUIRE(path);
  ANFIS_REQUIRE(out);
  return guarded([&] { *out = new anfis_model{anfis::load_model(path), {}}; });
}

anfis_status anfis_model_save(const anfis_model *model, const char *path) {
  ANFIS_REQUIRE(model);
  ANFIS_REQUIRE(path);
  return guarded([&] { anfis::save_model(model->model, path); });
}

void anfis_model_free(anfis_model *model) { delete model; }

size_t anfis_model_n_inputs(const anfis_model *model) { return model ? model->model.n_inputs() : 0; }
size_t anfis_model_rule_count(const anfis_model *model) { return model ? model->model.rule_count() : 0; }

const char *anfis_model_input_name(const anfis_model *model, size_t index) {
  if (!model || index >= model->model.n_inputs()) return nullptr;
  return model->model.inputs[index].column_name.c_str();
}

const char *anfis_model_output_name(const anfis_model *model) {
  return model ? model->model.output_name.c_str() : nullptr;
}

const char *anfis_model_provenance_json(const anfis_model *model) {
  if (!model) return nullptr;
  model->scratch = model->model.provenance.dump();
  return model->scratch.c_str();
}

anfis_status anfis_model_provenance_merge(anfis_model *model, const char *json_object) {
  ANFIS_REQUIRE(model);
  ANFIS_REQUIRE(json_object);
  return guarded([&] {
    const auto doc = nlohmann::json::parse(json_object);
    if (!doc.is_object()) throw anfis::Error(anfis::ErrorCode::parse, "provenance update must be an object");
    for (const auto &[key, value] : doc.items()) model->model.provenance[key] = value;
  });
}

anfis_status anfis_model_predict(const anfis_model *model, const double *points, size_t n_points, size_t n_inputs,
                                 double *out) {
  ANFIS_REQUIRE(model);
  if (n_points > 0) {
    ANFIS_REQUIRE(points);
    ANFIS_REQUIRE(out);
  }
  return guarded([&] {
    for (size_t i = 0; i < n_points; ++i) {
      out[i] = anfis::forward(model->model, std::span<const double>(points + i * n_inputs, n_inputs));
    }
  });
}

anfis_status anfis_model_predict_csv(const anfis_model *model, const char *points_csv, const char *out_csv) {
  ANFIS_REQUIRE(model);
  ANFIS_REQUIRE(points_csv);
  ANFIS_REQUIRE(out_csv);
  return guarded([&] {
    const auto &m = model->model;
    const auto points = anfis::load_csv(points_csv);
    const auto names = model_input_names(m);
    const anfis::Table X = anfis::select_columns(points, names);

    std::vector<anfis::Column> cols;
    for (const auto &name : names) cols.push_back(points.columns()[*points.find_column(name)]);
    std::string out_name = m.output_name;
    while (std::find(names.begin(), names.end(), out_name) != names.end()) out_name += "_pred";
    std::string unit;
    if (auto idx = points.find_column(m.output_name)) unit = points.columns()[*idx].unit;
    cols.push_back({out_name, unit});

    anfis::Table out(X.rows(), X.cols() + 1);
    for (Eigen::Index s = 0; s < X.rows(); ++s) {
      out.row(s).head(X.cols()) = X.row(s);
      out(s, X.cols()) = anfis::forward(m, std::span<const double>(X.row(s).data(), static_cast<size_t>(X.cols())));
    }
    anfis::write_csv(anfis::Dataset(std::move(cols), std::move(out)), out_csv);
  });
}

anfis_status anfis_model_evaluate(const anfis_model *model, const anfis_dataset *data, anfis_metrics *out) {
  ANFIS_REQUIRE(model);
  ANFIS_REQUIRE(data);
  ANFIS_REQUIRE(out);
  return guarded([&] {
    const auto &m = model->model;
    const auto X = anfis::select_columns(data->data, model_input_names(m));
    const std::vector<std::string> out_name{m.output_name};
    const auto Y = anfis::select_columns(data->data, out_name);
    std::vector<double> pred(static_cast<size_t>(X.rows()));
    std::vector<double> actual(pred.size());
    for (Eigen::Index s = 0; s < X.rows(); ++s) {
      pred[static_cast<size_t>(s)] =
          anfis::forward(m, std::span<const double>(X.row(s).data(), static_cast<size_t>(X.cols())));
      actual[static_cast<size_t>(s)] = Y(s, 0);
    }
    fill_metrics(anfis::evaluate_metrics(pred, actual), *out);
  });
}

// ---- traces -----------------------------------------------------------------------

size_t anfis_trace_length(const anfis_trace *trace) { return trace ? trace->trace.records.size() : 0; }
int anfis_trace_best_epoch(const anfis_trace *trace) { return trace ? trace->trace.best_epoch : 0; }

anfis_status anfis_trace_record(const anfis_trace *trace, size_t index, int *epoch, double *train_rmse,
                                double *step) {
  ANFIS_REQUIRE(trace);
  if (index >= trace->trace.records.size()) return fail(ANFIS_ERR_SHAPE, "trace index out of range");
  const auto &r = trace->trace.records[index];
  if (epoch) *epoch = r.epoch;
  if (train_rmse) *train_rmse = r.train_rmse;
  if (step) *step = r.step;
  return ANFIS_OK;
}

anfis_status anfis_trace_write_csv(const anfis_trace *trace, const char *path) {
  ANFIS_REQUIRE(trace);
  ANFIS_REQUIRE(path);
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw anfis::Error(anfis::ErrorCode::io, std::string("cannot open '") + path + "' for writing");
    out << "epoch,train_rmse,step\n";
    for (const auto &r : trace->trace.records) {
      out << r.epoch << ',' << anfis::format_real(r.train_rmse) << ',' << anfis::format_real(r.step) << '\n';
    }
    if (!out) throw anfis::Error(anfis::ErrorCode::io, std::string("failed writing '") + path + "'");
  });
}

void anfis_trace_free(anfis_trace *trace) { delete trace; }

// ---- sweeps ------------------------------------------------------------------------

anfis_status anfis_sweep_run(const anfis_dataset *data, const char *spec_json, unsigned jobs,
                             anfis_sweep_report **out) {
  ANFIS_REQUIRE(data);
  ANFIS_REQUIRE(out);
  return guarded([&] {
    anfis::SweepSpec spec;
    if (spec_json && *spec_json) spec = anfis::sweep_spec_from_json(nlohmann::json::parse(spec_json));
    *out = new anfis_sweep_report{anfis::run_sweep(data->data, spec, jobs), {}};
  });
}

size_t anfis_sweep_report_cell_count(const anfis_sweep_report *report) {
  return report ? report->report.cells.size() : 0;
}

anfis_status anfis_sweep_report_write_csv(const anfis_sweep_report *report, const char *path, int include_timing) {
  ANFIS_REQUIRE(report);
  ANFIS_REQUIRE(path);
  return guarded([&] { anfis::report_to_csv(report->report, path, include_timing != 0); });
}

anfis_status anfis_sweep_report_summary_json(anfis_sweep_report *report, const char **out) {
  ANFIS_REQUIRE(report);
  ANFIS_REQUIRE(out);
  return guarded([&] {
    report->summary = anfis::to_json(anfis::trend_summary(report->report)).dump();
    *out = report->summary.c_str();
  });
}

void anfis_sweep_report_free(anfis_sweep_report *report) { delete report; }

}  // extern "C"
