#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anfis/anfis.h"
#include "test_support.hpp"

using anfis::testing::TempDir;
using Catch::Matchers::WithinAbs;

namespace {

struct Free {
  void operator()(anfis_dataset *p) const { anfis_dataset_free(p); }
  void operator()(anfis_model *p) const { anfis_model_free(p); }
  void operator()(anfis_trace *p) const { anfis_trace_free(p); }
  void operator()(anfis_sweep_report *p) const { anfis_sweep_report_free(p); }
};
using Dataset = std::unique_ptr<anfis_dataset, Free>;
using Model = std::unique_ptr<anfis_model, Free>;
using Trace = std::unique_ptr<anfis_trace, Free>;
using Report = std::unique_ptr<anfis_sweep_report, Free>;

Dataset small_dataset(int n = 4) {
  anfis_grid_spec grid;
  anfis_grid_spec_default(&grid);
  grid.n_r = grid.n_theta = grid.n_z = n;
  anfis_surrogate_params params;
  anfis_surrogate_params_default(&params);
  anfis_dataset *raw = nullptr;
  REQUIRE(anfis_dataset_generate(&grid, &params, &raw) == ANFIS_OK);
  return Dataset(raw);
}

struct Trained {
  Model model;
  Trace trace;
};

Trained train_small(const anfis_dataset *data, const char *family = "gauss", int epochs = 5) {
  const char *inputs[] = {"x", "z"};
  anfis_model_spec spec{inputs, 2, "dpdz", 2, family, 0};
  anfis_train_config cfg;
  anfis_train_config_default(&cfg);
  cfg.epochs = epochs;
  anfis_model *m = nullptr;
  anfis_trace *t = nullptr;
  REQUIRE(anfis_model_train(data, &spec, &cfg, &m, &t) == ANFIS_OK);
  return {Model(m), Trace(t)};
}

}  // namespace

TEST_CASE("library metadata") {
  CHECK(std::string(anfis_version()).size() > 0);
  CHECK(std::string(anfis_status_name(ANFIS_OK)) == "ok");
  CHECK(std::string(anfis_status_name(ANFIS_ERR_RULE_EXPLOSION)) == "rule-explosion error");
  CHECK(std::string(anfis_status_name(static_cast<anfis_status>(42))) == "unknown status");
}

TEST_CASE("defaults describe the reference grid") {
  anfis_grid_spec grid;
  anfis_grid_spec_default(&grid);
  CHECK(grid.n_r == 10);
  CHECK(grid.n_theta == 12);
  CHECK(grid.n_z == 10);
  REQUIRE(grid.n_velocities == 5);
  CHECK(grid.velocities[1] == 0.005);

  anfis_surrogate_params params;
  anfis_surrogate_params_default(&params);
  CHECK(params.radius == 0.144);
  CHECK(params.noise_sd == 0.0);

  anfis_dataset *raw = nullptr;
  REQUIRE(anfis_dataset_generate(&grid, &params, &raw) == ANFIS_OK);
  Dataset d(raw);
  CHECK(anfis_dataset_rows(d.get()) == 6000);
  CHECK(anfis_dataset_cols(d.get()) == 5);
  CHECK(std::string(anfis_dataset_column_name(d.get(), 3)) == "v_as");
  CHECK(std::string(anfis_dataset_column_unit(d.get(), 4)) == "Pa/m");
  CHECK(anfis_dataset_column_name(d.get(), 5) == nullptr);

  anfis_dataset *mid = nullptr;
  REQUIRE(anfis_dataset_generate_midpoints(&grid, &params, &mid) == ANFIS_OK);
  CHECK(anfis_dataset_rows(mid) == 3888);
  anfis_dataset_free(mid);

  anfis_train_config cfg;
  anfis_train_config_default(&cfg);
  CHECK(cfg.epochs == 700);
  CHECK(cfg.initial_step == 0.01);
  CHECK(cfg.normalize_inputs == 1);
}

TEST_CASE("surrogate point evaluation") {
  anfis_surrogate_params params;
  anfis_surrogate_params_default(&params);
  double v = 0.0;
  REQUIRE(anfis_surrogate_dpdz(0.0, 0.0, 2.6, 0.005, &params, &v) == ANFIS_OK);
  CHECK_THAT(v, WithinAbs(-8812.5192, 1e-9));
  CHECK(anfis_surrogate_dpdz(1.0, 0.0, 1.0, 0.005, &params, &v) == ANFIS_ERR_DOMAIN);
  CHECK(std::string(anfis_last_error()).size() > 0);
  CHECK(anfis_surrogate_dpdz(0.0, 0.0, 1.0, 0.005, nullptr, &v) == ANFIS_ERR_NULL_ARGUMENT);
}

TEST_CASE("generation config documents") {
  anfis_grid_spec grid;
  anfis_surrogate_params params;
  double storage[8];
  REQUIRE(anfis_generation_config_parse(R"({"grid": {"n_r": 3, "velocities": [0.001, 0.002]},
                                            "surrogate": {"noise_sd": 1.5, "seed": 9}})",
                                        &grid, storage, 8, &params) == ANFIS_OK);
  CHECK(grid.n_r == 3);
  CHECK(grid.n_theta == 12);
  CHECK(grid.n_velocities == 2);
  CHECK(grid.velocities == storage);
  CHECK(params.noise_sd == 1.5);
  CHECK(params.seed == 9);
  CHECK(anfis_generation_config_parse("{", &grid, storage, 8, &params) == ANFIS_ERR_PARSE);
  CHECK(anfis_generation_config_parse(R"({"mesh": {}})", &grid, storage, 8, &params) == ANFIS_ERR_PARSE);
  CHECK(anfis_generation_config_parse("{}", &grid, storage, 2, &params) == ANFIS_ERR_CONFIGURATION);
}

TEST_CASE("datasets through the C interface") {
  TempDir dir;
  auto d = small_dataset();
  REQUIRE(anfis_dataset_rows(d.get()) == 320);
  const auto path = (dir / "d.csv").string();
  REQUIRE(anfis_dataset_write_csv(d.get(), path.c_str()) == ANFIS_OK);

  anfis_dataset *raw = nullptr;
  REQUIRE(anfis_dataset_load_csv(path.c_str(), &raw) == ANFIS_OK);
  Dataset back(raw);
  REQUIRE(anfis_dataset_rows(back.get()) == 320);
  for (size_t r = 0; r < 320; r += 7) {
    for (size_t c = 0; c < 5; ++c) {
      double a = 0.0, b = 0.0;
      REQUIRE(anfis_dataset_value(d.get(), r, c, &a) == ANFIS_OK);
      REQUIRE(anfis_dataset_value(back.get(), r, c, &b) == ANFIS_OK);
      CHECK(a == b);
    }
  }
  double v = 0.0;
  CHECK(anfis_dataset_value(d.get(), 320, 0, &v) == ANFIS_ERR_SHAPE);

  anfis_dataset *train = nullptr, *test = nullptr;
  REQUIRE(anfis_dataset_split(d.get(), 0.7, 0, &train, &test) == ANFIS_OK);
  CHECK(anfis_dataset_rows(train) == 224);
  CHECK(anfis_dataset_rows(test) == 96);
  anfis_dataset_free(train);
  anfis_dataset_free(test);
  CHECK(anfis_dataset_split(d.get(), 1.0, 0, &train, &test) == ANFIS_ERR_CONFIGURATION);

  CHECK(anfis_dataset_load_csv((dir / "missing.csv").string().c_str(), &raw) == ANFIS_ERR_IO);
  anfis::testing::write_file(dir / "bad.csv", "a,b\n1,2\n3,x\n");
  CHECK(anfis_dataset_load_csv((dir / "bad.csv").string().c_str(), &raw) == ANFIS_ERR_PARSE);
  CHECK(std::string(anfis_last_error()).find("row 2") != std::string::npos);
}

TEST_CASE("training, saving and loading models") {
  TempDir dir;
  auto d = small_dataset();
  auto [model, trace] = train_small(d.get());
  CHECK(anfis_model_n_inputs(model.get()) == 2);
  CHECK(anfis_model_rule_count(model.get()) == 4);
  CHECK(std::string(anfis_model_input_name(model.get(), 1)) == "z");
  CHECK(std::string(anfis_model_output_name(model.get())) == "dpdz");

  REQUIRE(anfis_trace_length(trace.get()) == 5);
  const int best = anfis_trace_best_epoch(trace.get());
  CHECK(best >= 1);
  CHECK(best <= 5);
  int epoch = 0;
  double rmse = 0.0, step = 0.0;
  REQUIRE(anfis_trace_record(trace.get(), 0, &epoch, &rmse, &step) == ANFIS_OK);
  CHECK(epoch == 1);
  CHECK(step == 0.01);
  CHECK(anfis_trace_record(trace.get(), 5, &epoch, &rmse, &step) == ANFIS_ERR_SHAPE);
  REQUIRE(anfis_trace_write_csv(trace.get(), (dir / "trace.csv").string().c_str()) == ANFIS_OK);
  CHECK(anfis::testing::read_file(dir / "trace.csv").rfind("epoch,train_rmse,step\n", 0) == 0);

  REQUIRE(anfis_model_provenance_merge(model.get(), R"({"dataset_rows": 320})") == ANFIS_OK);
  CHECK(anfis_model_provenance_merge(model.get(), "[1]") == ANFIS_ERR_PARSE);
  const auto prov = nlohmann::json::parse(anfis_model_provenance_json(model.get()));
  CHECK(prov.at("dataset_rows") == 320);
  CHECK(prov.at("epochs") == 5);

  const auto path = (dir / "m.json").string();
  REQUIRE(anfis_model_save(model.get(), path.c_str()) == ANFIS_OK);
  anfis_model *raw = nullptr;
  REQUIRE(anfis_model_load(path.c_str(), &raw) == ANFIS_OK);
  Model back(raw);
  const double pts[] = {0.01, 1.0, -0.05, 2.0};
  double a[2], b[2];
  REQUIRE(anfis_model_predict(model.get(), pts, 2, 2, a) == ANFIS_OK);
  REQUIRE(anfis_model_predict(back.get(), pts, 2, 2, b) == ANFIS_OK);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(anfis_model_predict(model.get(), pts, 1, 3, a) == ANFIS_ERR_SHAPE);

  anfis_metrics m{};
  REQUIRE(anfis_model_evaluate(model.get(), d.get(), &m) == ANFIS_OK);
  CHECK(m.n == 320);
  CHECK(std::isfinite(m.rmse));
  CHECK(m.rmse >= m.mae);

  anfis::testing::write_file(dir / "v2.json", R"({"format_version": 2})");
  CHECK(anfis_model_load((dir / "v2.json").string().c_str(), &raw) == ANFIS_ERR_VERSION);
}

TEST_CASE("batch prediction from CSV matches point prediction") {
  TempDir dir;
  auto d = small_dataset();
  auto [model, trace] = train_small(d.get(), "gbell");

  std::string text = "x[m],y[m],z[m]\n";
  std::vector<double> pts;
  for (size_t r = 0; r < 10; ++r) {
    double x = 0.0, y = 0.0, z = 0.0;
    anfis_dataset_value(d.get(), r * 31, 0, &x);
    anfis_dataset_value(d.get(), r * 31, 1, &y);
    anfis_dataset_value(d.get(), r * 31, 2, &z);
    char line[128];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x, y, z);
    text += line;
    pts.push_back(x);
    pts.push_back(z);
  }
  anfis::testing::write_file(dir / "pts.csv", text);
  const auto out = (dir / "pred.csv").string();
  REQUIRE(anfis_model_predict_csv(model.get(), (dir / "pts.csv").string().c_str(), out.c_str()) == ANFIS_OK);

  std::vector<double> expected(10);
  REQUIRE(anfis_model_predict(model.get(), pts.data(), 10, 2, expected.data()) == ANFIS_OK);
  anfis_dataset *raw = nullptr;
  REQUIRE(anfis_dataset_load_csv(out.c_str(), &raw) == ANFIS_OK);
  Dataset pred(raw);
  REQUIRE(anfis_dataset_rows(pred.get()) == 10);
  REQUIRE(anfis_dataset_cols(pred.get()) == 3);
  CHECK(std::string(anfis_dataset_column_name(pred.get(), 2)) == "dpdz");
  for (size_t r = 0; r < 10; ++r) {
    double v = 0.0;
    anfis_dataset_value(pred.get(), r, 2, &v);
    CHECK(v == expected[r]);
  }

  anfis::testing::write_file(dir / "empty.csv", "x[m],z[m]\n");
  REQUIRE(anfis_model_predict_csv(model.get(), (dir / "empty.csv").string().c_str(), out.c_str()) == ANFIS_OK);
  CHECK(anfis::testing::read_file(out) == "x[m],z[m],dpdz\n");

  anfis::testing::write_file(dir / "noz.csv", "x[m]\n1\n");
  CHECK(anfis_model_predict_csv(model.get(), (dir / "noz.csv").string().c_str(), out.c_str()) ==
        ANFIS_ERR_SELECTION);
}

TEST_CASE("training errors map to status codes") {
  auto d = small_dataset();
  anfis_train_config cfg;
  anfis_train_config_default(&cfg);
  cfg.epochs = 1;
  anfis_model *m = nullptr;

  const char *four[] = {"x", "y", "z", "v_as"};
  anfis_model_spec explode{four, 4, "dpdz", 6, "gbell", 1000};
  CHECK(anfis_model_train(d.get(), &explode, &cfg, &m, nullptr) == ANFIS_ERR_RULE_EXPLOSION);
  CHECK(std::string(anfis_last_error()).find("1296") != std::string::npos);

  const char *one[] = {"x"};
  anfis_model_spec bad_family{one, 1, "dpdz", 2, "trapezoid", 0};
  CHECK(anfis_model_train(d.get(), &bad_family, &cfg, &m, nullptr) == ANFIS_ERR_PARAMETER_DOMAIN);

  const char *unknown[] = {"w"};
  anfis_model_spec bad_column{unknown, 1, "dpdz", 2, "gauss", 0};
  CHECK(anfis_model_train(d.get(), &bad_column, &cfg, &m, nullptr) == ANFIS_ERR_SELECTION);

  anfis_model_spec one_mf{one, 1, "dpdz", 1, "gauss", 0};
  CHECK(anfis_model_train(d.get(), &one_mf, &cfg, &m, nullptr) == ANFIS_ERR_CONFIGURATION);

  cfg.epochs = 0;
  anfis_model_spec ok{one, 1, "dpdz", 2, "gauss", 0};
  CHECK(anfis_model_train(d.get(), &ok, &cfg, &m, nullptr) == ANFIS_ERR_CONFIGURATION);
  CHECK(anfis_model_train(d.get(), nullptr, &cfg, &m, nullptr) == ANFIS_ERR_NULL_ARGUMENT);
  CHECK(m == nullptr);
}

TEST_CASE("sweeps through the C interface") {
  TempDir dir;
  auto d = small_dataset();
  anfis_sweep_report *raw = nullptr;
  REQUIRE(anfis_sweep_run(d.get(), R"({"input_sets": [["x"], ["x", "z"]], "mf_counts": [2],
                                       "families": ["gauss", "tri"], "train": {"epochs": 2}})",
                          2, &raw) == ANFIS_OK);
  Report report(raw);
  CHECK(anfis_sweep_report_cell_count(report.get()) == 4);
  const auto path = (dir / "s.csv").string();
  REQUIRE(anfis_sweep_report_write_csv(report.get(), path.c_str(), 0) == ANFIS_OK);
  CHECK(anfis::testing::read_file(path).find("x|z,2,tri,ok,4,") != std::string::npos);

  const char *summary = nullptr;
  REQUIRE(anfis_sweep_report_summary_json(report.get(), &summary) == ANFIS_OK);
  const auto j = nlohmann::json::parse(summary);
  CHECK(j.at("best_by_input_count").size() == 2);

  CHECK(anfis_sweep_run(d.get(), R"({"bogus": 1})", 1, &raw) == ANFIS_ERR_PARSE);
  CHECK(anfis_sweep_run(d.get(), "not json", 1, &raw) == ANFIS_ERR_PARSE);
  CHECK(anfis_sweep_run(d.get(), R"({"input_sets": [["w"]]})", 1, &raw) == ANFIS_ERR_SELECTION);
}
