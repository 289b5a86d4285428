#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anfis/dataset.hpp"
#include "anfis/metrics.hpp"
#include "anfis/trainer.hpp"

namespace anfis {

/// Epoch count used by sweeps unless overridden.
inline constexpr int kSweepDefaultEpochs = 100;

struct SweepSpec {
  std::vector<std::vector<std::string>> input_sets = {{"x"}, {"x", "y"}, {"x", "y", "z"}, {"x", "y", "z", "v_as"}};
  std::vector<int> mf_counts = {2, 4, 6};
  /// Per input-set size override of mf_counts.
  std::map<std::size_t, std::vector<int>> mf_counts_by_size;
  std::vector<MfFamily> families = {kAllFamilies.begin(), kAllFamilies.end()};
  std::string output_name = "dpdz";
  TrainConfig train = [] {
    TrainConfig c;
    c.epochs = kSweepDefaultEpochs;
    return c;
  }();
  double train_frac = 0.7;
  std::uint64_t split_seed = 0;
  std::size_t max_rules = kDefaultMaxRules;

  const std::vector<int> &counts_for(std::size_t input_set_size) const;

  /// Six-MF runs only for one and two inputs; 60 cells with all families.
  static SweepSpec reference_matrix();
};

void validate(const SweepSpec &spec);
nlohmann::json to_json(const SweepSpec &spec);
/// Missing keys keep the defaults in `base`.
SweepSpec sweep_spec_from_json(const nlohmann::json &doc, SweepSpec base = {});

enum class CellStatus { ok, skipped_rule_explosion, failed };
std::string_view to_string(CellStatus status) noexcept;

struct SweepCell {
  std::vector<std::string> input_set;
  int mf_count = 0;
  MfFamily family = MfFamily::gbell;
  CellStatus status = CellStatus::failed;
  std::size_t rule_count = 0;
  std::optional<MetricReport> train;
  std::optional<MetricReport> test;
  std::optional<MetricReport> combined;
  double wall_time_s = 0.0;
  std::string message;  // failure reason, empty otherwise
};

struct SweepReport {
  std::vector<SweepCell> cells;
};

/// Trains and scores one configuration on a fixed partition. Never throws for
/// per-cell failures; they are reported through the status.
SweepCell run_cell(const Dataset &dataset, const SplitIndices &partition, const SweepSpec &spec,
                   const std::vector<std::string> &input_set, int mf_count, MfFamily family);

/// One cell per (input set, count, family), ordered by those axes. All cells
/// share one split. `jobs` > 1 runs cells on worker threads.
SweepReport run_sweep(const Dataset &dataset, const SweepSpec &spec, unsigned jobs = 1);

std::string join_input_set(const std::vector<std::string> &names);

/// Comma-separated; input sets joined with '|'; metrics blank unless ok.
/// Wall time is written only when include_timing is set so repeated sweeps
/// stay byte-identical by default.
std::string format_report_csv(const SweepReport &report, bool include_timing = false);
void report_to_csv(const SweepReport &report, const std::filesystem::path &path, bool include_timing = false);

struct TrendSummary {
  /// input-set size -> best held-out determination R^2
  std::map<std::size_t, double> best_by_size;
  /// (input-set size, mf count) -> best held-out determination R^2
  std::map<std::pair<std::size_t, int>, double> best_by_size_count;
};

/// Throws Error(summary) when no cell finished ok.
TrendSummary trend_summary(const SweepReport &report);
nlohmann::json to_json(const TrendSummary &summary);

}  // namespace anfis
