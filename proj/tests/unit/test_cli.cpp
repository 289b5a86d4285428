#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_support.hpp"

using namespace anfis::cli;
using anfis::testing::TempDir;

namespace {

// Swaps a standard stream's buffer for the lifetime of the object.
class Capture {
 public:
  explicit Capture(std::ostream &stream) : stream_(stream), old_(stream.rdbuf(buffer_.rdbuf())) {}
  ~Capture() { stream_.rdbuf(old_); }
  std::string text() const { return buffer_.str(); }

 private:
  std::ostream &stream_;
  std::ostringstream buffer_;
  std::streambuf *old_;
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "anfis-cli");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  Capture out(std::cout), err(std::cerr);
  const int code = run(static_cast<int>(argv.size()), argv.data());
  return {code, out.text(), err.text()};
}

Command parse(std::vector<std::string> args) {
  args.insert(args.begin(), "anfis-cli");
  return parse_args(args);
}

int usage_code(std::vector<std::string> args, std::string *message = nullptr) {
  try {
    (void)parse(std::move(args));
  } catch (const UsageError &e) {
    if (message) *message = e.what();
    return e.exit_code();
  }
  return -1;
}

class ScopedEnv {
 public:
  ScopedEnv(const char *name, const char *value) : name_(name) { ::setenv(name, value, 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char *name_;
};

std::vector<std::string> small_grid() { return {"--n-r", "4", "--n-theta", "4", "--n-z", "4"}; }

}  // namespace

TEST_CASE("gen defaults") {
  const auto cmd = parse({"gen", "--out", "d.csv"});
  REQUIRE(cmd.subcommand() == "gen");
  const auto &g = std::get<GenArgs>(cmd.args);
  CHECK(g.out == "d.csv");
  CHECK(g.n_r == 10);
  CHECK(g.n_theta == 12);
  CHECK(g.n_z == 10);
  CHECK(g.velocities == std::vector<double>{0.0025, 0.005, 0.0075, 0.01, 0.0125});
  CHECK(g.noise_sd == 0.0);
  CHECK_FALSE(g.midpoints);
}

TEST_CASE("train and sweep defaults") {
  const auto t = std::get<TrainArgs>(parse({"train", "--data", "d.csv"}).args);
  CHECK(t.training.epochs == 700);
  CHECK(t.training.train_frac == 0.7);
  CHECK(t.training.max_rules == 10000);
  CHECK(t.mf_count == 4);
  CHECK(t.mf_type == "gbell");
  CHECK(t.inputs == std::vector<std::string>{"x", "y", "z", "v_as"});
  CHECK(t.model_out == "model.json");

  const auto s = std::get<SweepArgs>(parse({"sweep", "--data", "d.csv", "--out", "s.csv"}).args);
  CHECK(s.training.epochs == 100);
  CHECK(s.input_sets.size() == 4);
  CHECK(s.mf_counts == std::vector<int>{2, 4, 6});
  CHECK(s.mf_types.size() == 6);
  CHECK(s.jobs == 1);
  CHECK_FALSE(s.reference_matrix);
}

TEST_CASE("flag parsing") {
  const auto t = std::get<TrainArgs>(
      parse({"train", "--data", "d.csv", "--inputs", "x,z", "--mf-type", "tri", "--epochs", "12", "--no-normalize"})
          .args);
  CHECK(t.inputs == std::vector<std::string>{"x", "z"});
  CHECK(t.mf_type == "tri");
  CHECK(t.training.epochs == 12);
  CHECK(t.training.no_normalize);

  const auto s = std::get<SweepArgs>(parse({"sweep", "--data", "d", "--out", "o", "--input-sets", "x;x,y",
                                            "--mf-types", "all", "--mf-counts", "2,4", "--reference-matrix", "--jobs",
                                            "3"})
                                         .args);
  CHECK(s.input_sets == std::vector<std::vector<std::string>>{{"x"}, {"x", "y"}});
  CHECK(s.mf_types.size() == 6);
  CHECK(s.mf_counts == std::vector<int>{2, 4});
  CHECK(s.reference_matrix);
  CHECK(s.jobs == 3);

  const auto e = std::get<EvalArgs>(parse({"eval", "--model", "m", "--data", "d"}).args);
  CHECK_FALSE(e.train_frac.has_value());
  CHECK_FALSE(e.seed.has_value());
  const auto e2 = std::get<EvalArgs>(parse({"eval", "--model", "m", "--data", "d", "--seed", "4"}).args);
  CHECK(e2.seed == 4u);
}

TEST_CASE("usage errors") {
  std::string msg;
  CHECK(usage_code({"train"}, &msg) == kExitUsage);
  CHECK(msg.find("missing --data") != std::string::npos);
  CHECK(usage_code({"frobnicate"}) == kExitUsage);
  CHECK(usage_code({}) == kExitUsage);
  CHECK(usage_code({"gen"}, &msg) == kExitUsage);
  CHECK(msg.find("missing --out") != std::string::npos);
  CHECK(usage_code({"train", "--data", "d", "--epochs", "many"}) == kExitUsage);
  CHECK(usage_code({"sweep", "--data", "d", "--out", "o", "--input-sets", ";"}) == kExitUsage);
  CHECK(usage_code({"predict", "--model", "m", "--points", "p"}, &msg) == kExitUsage);
  CHECK(msg.find("missing --out") != std::string::npos);

  CHECK(usage_code({"--help"}, &msg) == kExitOk);
  CHECK(msg.find("sweep") != std::string::npos);
  CHECK(usage_code({"train", "--help"}, &msg) == kExitOk);
  CHECK(msg.find("700") != std::string::npos);
  CHECK(usage_code({"sweep", "--help"}, &msg) == kExitOk);
  CHECK(msg.find("100") != std::string::npos);

  const auto r = run_cli({"frobnicate"});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("rule limit from the environment") {
  {
    ScopedEnv env("ANFIS_MAX_RULES", "500");
    CHECK(std::get<TrainArgs>(parse({"train", "--data", "d"}).args).training.max_rules == 500);
    CHECK(std::get<TrainArgs>(parse({"train", "--data", "d", "--max-rules", "7"}).args).training.max_rules == 7);
  }
  CHECK(std::get<TrainArgs>(parse({"train", "--data", "d"}).args).training.max_rules == 10000);

  TempDir dir;
  const auto data = (dir / "d.csv").string();
  auto gen = std::vector<std::string>{"gen", "--out", data};
  for (const auto &a : small_grid()) gen.push_back(a);
  REQUIRE(run_cli(gen).code == kExitOk);

  ScopedEnv env("ANFIS_MAX_RULES", "1000");
  const auto r = run_cli({"train", "--data", data, "--mf-count", "6", "--epochs", "1", "--model-out",
                          (dir / "m.json").string()});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("rule explosion") != std::string::npos);
  CHECK(r.err.find("1296") != std::string::npos);
}

TEST_CASE("config files supply flag defaults") {
  TempDir dir;
  anfis::testing::write_file(dir / "train.json",
                             R"({"epochs": 5, "inputs": ["x", "z"], "mf_type": "tri", "train-frac": 0.6})");
  const auto cfg = (dir / "train.json").string();
  const auto t = std::get<TrainArgs>(parse({"train", "--data", "d", "--config", cfg}).args);
  CHECK(t.training.epochs == 5);
  CHECK(t.inputs == std::vector<std::string>{"x", "z"});
  CHECK(t.mf_type == "tri");
  CHECK(t.training.train_frac == 0.6);
  const auto o = std::get<TrainArgs>(parse({"train", "--data", "d", "--config", cfg, "--epochs", "9"}).args);
  CHECK(o.training.epochs == 9);

  anfis::testing::write_file(dir / "sweep.json", R"({"input_sets": [["x"], ["x", "y"]], "mf_counts": [2]})");
  const auto s = std::get<SweepArgs>(
      parse({"sweep", "--data", "d", "--out", "o", "--config", (dir / "sweep.json").string()}).args);
  CHECK(s.input_sets == std::vector<std::vector<std::string>>{{"x"}, {"x", "y"}});
  CHECK(s.mf_counts == std::vector<int>{2});

  anfis::testing::write_file(dir / "bad.json", "[1, 2]");
  CHECK(usage_code({"train", "--data", "d", "--config", (dir / "bad.json").string()}) == kExitUsage);
  CHECK(usage_code({"train", "--data", "d", "--config", (dir / "none.json").string()}) == kExitUsage);
}

TEST_CASE("gen, train, eval and predict end to end") {
  TempDir dir;
  const auto data = (dir / "d.csv").string();
  auto gen = std::vector<std::string>{"gen", "--out", data};
  for (const auto &a : small_grid()) gen.push_back(a);
  auto r = run_cli(gen);
  REQUIRE(r.code == kExitOk);
  const auto gen_prov = nlohmann::json::parse(r.out);
  CHECK(gen_prov.at("rows") == 320);
  CHECK(gen_prov.at("kind") == "surrogate");

  const auto model = (dir / "m.json").string();
  r = run_cli({"train", "--data", data, "--inputs", "x,z,v_as", "--mf-count", "2", "--epochs", "5", "--model-out",
               model, "--trace-out", (dir / "trace.csv").string()});
  REQUIRE(r.code == kExitOk);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary.at("rules") == 8);
  const auto model_doc = nlohmann::json::parse(anfis::testing::read_file(model));
  const auto &prov = model_doc.at("provenance");
  CHECK(prov.at("dataset_rows") == 320);
  CHECK(prov.at("train_rows") == 224);
  CHECK(prov.at("test_rows") == 96);
  CHECK(prov.at("epochs") == 5);
  CHECK(prov.at("train_frac") == 0.7);

  r = run_cli({"eval", "--model", model, "--data", data, "--predictions-out", (dir / "all.csv").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind("metric,value\n", 0) == 0);
  CHECK(r.out.find("n_test,96\n") != std::string::npos);
  CHECK(r.out.find("r2_test,") != std::string::npos);
  CHECK(r.out.find("r2_combined,") != std::string::npos);

  anfis::testing::write_file(dir / "pts.csv", "x[m],z[m],v_as[m/s]\n0,1.3,0.005\n0.1,0.2,0.01\n");
  r = run_cli({"predict", "--model", model, "--points", (dir / "pts.csv").string(), "--out",
               (dir / "pred.csv").string()});
  REQUIRE(r.code == kExitOk);
  const auto pred = anfis::testing::read_file(dir / "pred.csv");
  CHECK(pred.rfind("x[m],z[m],v_as[m/s],dpdz\n", 0) == 0);

  anfis::testing::write_file(dir / "empty.csv", "x[m],z[m],v_as[m/s]\n");
  r = run_cli({"predict", "--model", model, "--points", (dir / "empty.csv").string(), "--out",
               (dir / "pred.csv").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(anfis::testing::read_file(dir / "pred.csv") == "x[m],z[m],v_as[m/s],dpdz\n");

  r = run_cli({"predict", "--model", (dir / "missing.json").string(), "--points", (dir / "pts.csv").string(), "--out",
               (dir / "pred.csv").string()});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("I/O error") != std::string::npos);
}

TEST_CASE("sweep from the command line") {
  TempDir dir;
  const auto data = (dir / "d.csv").string();
  auto gen = std::vector<std::string>{"gen", "--out", data};
  for (const auto &a : small_grid()) gen.push_back(a);
  REQUIRE(run_cli(gen).code == kExitOk);

  const auto out = (dir / "s.csv").string();
  const auto r = run_cli({"sweep", "--data", data, "--out", out, "--input-sets", "x;x,z", "--mf-counts", "2",
                          "--mf-types", "gauss,tri", "--epochs", "2", "--summary-out", (dir / "sum.json").string()});
  REQUIRE(r.code == kExitOk);
  const auto report = anfis::testing::read_file(out);
  CHECK(std::count(report.begin(), report.end(), '\n') == 5);
  CHECK(nlohmann::json::parse(r.out) == nlohmann::json::parse(anfis::testing::read_file(dir / "sum.json")));

  const auto bad = run_cli({"sweep", "--data", data, "--out", out, "--mf-types", "bogus", "--epochs", "1"});
  CHECK(bad.code == kExitRuntime);
}
