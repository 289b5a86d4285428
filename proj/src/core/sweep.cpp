#include "anfis/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include "anfis/error.hpp"

namespace anfis {

using nlohmann::json;

const std::vector<int> &SweepSpec::counts_for(std::size_t input_set_size) const {
  auto it = mf_counts_by_size.find(input_set_size);
  return it == mf_counts_by_size.end() ? mf_counts : it->second;
}

SweepSpec SweepSpec::reference_matrix() {
  SweepSpec spec;
  spec.mf_counts = {2, 4, 6};
  spec.mf_counts_by_size = {{3, {2, 4}}, {4, {2, 4}}};
  return spec;
}

void validate(const SweepSpec &spec) {
  if (spec.input_sets.empty() || spec.families.empty()) throw Error(ErrorCode::configuration, "empty sweep grid");
  std::size_t cells = 0;
  for (const auto &set : spec.input_sets) {
    if (set.empty()) throw Error(ErrorCode::configuration, "sweep input set is empty");
    for (int m : spec.counts_for(set.size())) {
      if (m < 2) throw Error(ErrorCode::configuration, "membership count must be at least 2");
    }
    cells += spec.counts_for(set.size()).size();
  }
  if (cells == 0) throw Error(ErrorCode::configuration, "empty sweep grid");
  validate(spec.train);
  if (!(spec.train_frac > 0.0 && spec.train_frac < 1.0)) {
    throw Error(ErrorCode::configuration, "train fraction must lie strictly between 0 and 1");
  }
}

json to_json(const SweepSpec &spec) {
  json families = json::array();
  for (auto f : spec.families) families.push_back(std::string(to_string(f)));
  json by_size = json::object();
  for (const auto &[size, counts] : spec.mf_counts_by_size) by_size[std::to_string(size)] = counts;
  return {{"input_sets", spec.input_sets},
          {"mf_counts", spec.mf_counts},
          {"mf_counts_by_size", by_size},
          {"families", families},
          {"output_name", spec.output_name},
          {"train", to_json(spec.train)},
          {"train_frac", spec.train_frac},
          {"split_seed", spec.split_seed},
          {"max_rules", spec.max_rules}};
}

SweepSpec sweep_spec_from_json(const json &doc, SweepSpec base) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "sweep spec must be an object");
  for (const auto &[key, value] : doc.items()) {
    try {
      if (key == "input_sets") {
        base.input_sets = value.get<std::vector<std::vector<std::string>>>();
      } else if (key == "mf_counts") {
        base.mf_counts = value.get<std::vector<int>>();
      } else if (key == "mf_counts_by_size") {
        base.mf_counts_by_size.clear();
        for (const auto &[size, counts] : value.items()) {
          base.mf_counts_by_size[std::stoul(size)] = counts.get<std::vector<int>>();
        }
      } else if (key == "families") {
        base.families.clear();
        for (const auto &name : value) base.families.push_back(parse_family(name.get<std::string>()));
      } else if (key == "output_name") {
        base.output_name = value.get<std::string>();
      } else if (key == "train") {
        base.train = train_config_from_json(value, base.train);
      } else if (key == "train_frac") {
        base.train_frac = value.get<double>();
      } else if (key == "split_seed") {
        base.split_seed = value.get<std::uint64_t>();
      } else if (key == "max_rules") {
        base.max_rules = value.get<std::size_t>();
      } else {
        throw Error(ErrorCode::parse, "sweep spec: unknown field '" + key + "'");
      }
    } catch (const json::exception &) {
      throw Error(ErrorCode::parse, "sweep spec: field '" + key + "' has the wrong type");
    } catch (const std::invalid_argument &) {
      throw Error(ErrorCode::parse, "sweep spec: mf_counts_by_size keys must be integers");
    }
  }
  validate(base);
  return base;
}

std::string_view to_string(CellStatus status) noexcept {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::skipped_rule_explosion: return "skipped_rule_explosion";
    case CellStatus::failed: return "failed";
  }
  return "?";
}

namespace {

std::vector<double> predict_rows(const AnfisModel &model, const Table &X) {
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    out[static_cast<std::size_t>(s)] =
        forward(model, std::span<const double>(X.row(s).data(), static_cast<std::size_t>(X.cols())));
  }
  return out;
}

MetricReport score(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y) {
  const auto pred = predict_rows(model, X);
  return evaluate_metrics(pred, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

}  // namespace

SweepCell run_cell(const Dataset &dataset, const SplitIndices &partition, const SweepSpec &spec,
                   const std::vector<std::string> &input_set, int mf_count, MfFamily family) {
  const auto start = std::chrono::steady_clock::now();
  SweepCell cell;
  cell.input_set = input_set;
  cell.mf_count = mf_count;
  cell.family = family;
  cell.rule_count = grid_rule_count(input_set.size(), mf_count);
  try {
    const Dataset train_set = dataset.subset(partition.train);
    const Dataset test_set = dataset.subset(partition.test);
    const auto reg = select_regression(train_set, input_set, spec.output_name);
    BuildOptions opts;
    opts.max_rules = spec.max_rules;
    opts.normalize_inputs = spec.train.normalize_inputs;
    auto model = build_model(reg.inputs, mf_count, family, spec.output_name, opts);
    auto trained = train(std::move(model), reg.X, reg.y, spec.train).model;

    const auto test = select_regression(test_set, input_set, spec.output_name);
    const auto all = select_regression(dataset, input_set, spec.output_name);
    cell.train = score(trained, reg.X, reg.y);
    cell.test = score(trained, test.X, test.y);
    cell.combined = score(trained, all.X, all.y);
    cell.status = CellStatus::ok;
  } catch (const RuleExplosionError &e) {
    cell.status = CellStatus::skipped_rule_explosion;
    cell.rule_count = e.rule_count();
    cell.message = e.what();
  } catch (const std::exception &e) {
    cell.status = CellStatus::failed;
    cell.message = e.what();
  }
  if (cell.status != CellStatus::ok) cell.train = cell.test = cell.combined = std::nullopt;
  cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

SweepReport run_sweep(const Dataset &dataset, const SweepSpec &spec, unsigned jobs) {
  validate(spec);
  if (!dataset.find_column(spec.output_name)) {
    throw Error(ErrorCode::selection, "unknown output column '" + spec.output_name + "'");
  }
  for (const auto &set : spec.input_sets) {
    for (const auto &name : set) {
      if (!dataset.find_column(name)) throw Error(ErrorCode::selection, "unknown input column '" + name + "'");
    }
  }

  struct Task {
    const std::vector<std::string> *input_set;
    int mf_count;
    MfFamily family;
  };
  std::vector<Task> tasks;
  for (const auto &set : spec.input_sets) {
    for (int m : spec.counts_for(set.size())) {
      for (auto f : spec.families) tasks.push_back({&set, m, f});
    }
  }

  const auto partition = split_indices(dataset.rows(), spec.train_frac, spec.split_seed);
  SweepReport report;
  report.cells.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto &t = tasks[i];
      report.cells[i] = run_cell(dataset, partition, spec, *t.input_set, t.mf_count, t.family);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return report;
}

std::string join_input_set(const std::vector<std::string> &names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += '|';
    out += names[i];
  }
  return out;
}

std::string format_report_csv(const SweepReport &report, bool include_timing) {
  std::string out = "input_set,mf_count,family,status,rule_count,r2_train,r2_test,r2_combined,rmse_test,wall_time_s\n";
  for (const auto &c : report.cells) {
    out += join_input_set(c.input_set) + ',' + std::to_string(c.mf_count) + ',' + std::string(to_string(c.family)) +
           ',' + std::string(to_string(c.status)) + ',' + std::to_string(c.rule_count) + ',';
    if (c.status == CellStatus::ok) {
      out += format_real(c.train->r2_determination) + ',' + format_real(c.test->r2_determination) + ',' +
             format_real(c.combined->r2_determination) + ',' + format_real(c.test->rmse) + ',';
    } else {
      out += ",,,,";
    }
    if (include_timing) out += format_real(c.wall_time_s);
    out += '\n';
  }
  return out;
}

void report_to_csv(const SweepReport &report, const std::filesystem::path &path, bool include_timing) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << format_report_csv(report, include_timing);
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

TrendSummary trend_summary(const SweepReport &report) {
  TrendSummary s;
  for (const auto &c : report.cells) {
    if (c.status != CellStatus::ok) continue;
    const double r2 = c.test->r2_determination;
    const auto size = c.input_set.size();
    auto [it, inserted] = s.best_by_size.try_emplace(size, r2);
    if (!inserted) it->second = std::max(it->second, r2);
    auto [jt, jinserted] = s.best_by_size_count.try_emplace({size, c.mf_count}, r2);
    if (!jinserted) jt->second = std::max(jt->second, r2);
  }
  if (s.best_by_size.empty()) throw Error(ErrorCode::summary, "sweep report has no successful cells");
  return s;
}

json to_json(const TrendSummary &summary) {
  json by_size = json::array();
  for (const auto &[size, r2] : summary.best_by_size) by_size.push_back({{"inputs", size}, {"best_r2_test", r2}});
  json by_count = json::array();
  for (const auto &[key, r2] : summary.best_by_size_count) {
    by_count.push_back({{"inputs", key.first}, {"mf_count", key.second}, {"best_r2_test", r2}});
  }
  return {{"best_by_input_count", by_size}, {"best_by_input_and_mf_count", by_count}};
}

}  // namespace anfis
