#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "anfis/membership.hpp"

namespace anfis {

inline constexpr std::size_t kDefaultMaxRules = 10000;
inline constexpr int kModelFormatVersion = 1;

struct InputSpec {
  std::string column_name;
  Interval range;  // data units

  friend bool operator==(const InputSpec &, const InputSpec &) = default;
};

struct Rule {
  std::vector<std::uint32_t> mf_index;  // one entry per input

  friend bool operator==(const Rule &, const Rule &) = default;
};

using ConsequentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// First-order Sugeno model over a grid-partitioned rule base.
///
/// When `normalize_inputs` is set the banks and consequents live in min-max
/// scaled coordinates ([lo, hi] of each InputSpec mapped to [0, 1]); callers
/// always pass raw data-unit inputs and scaling is applied internally.
struct AnfisModel {
  std::vector<InputSpec> inputs;
  MfFamily family = MfFamily::gbell;
  std::vector<MfBank> banks;
  std::vector<Rule> rules;
  ConsequentMatrix consequents;  // rules x (n_inputs + 1), row = [p, q, ..., t]
  std::string output_name;
  bool normalize_inputs = true;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t n_inputs() const noexcept { return inputs.size(); }
  std::size_t rule_count() const noexcept { return rules.size(); }
  std::size_t coefficient_count() const noexcept { return rules.size() * (inputs.size() + 1); }
  std::size_t premise_param_count() const noexcept;

  bool operator==(const AnfisModel &other) const;
};

struct BuildOptions {
  std::size_t max_rules = kDefaultMaxRules;
  bool normalize_inputs = true;
};

/// mf_count^n_inputs, saturating at SIZE_MAX.
std::size_t grid_rule_count(std::size_t n_inputs, int mf_count) noexcept;

/// Grid-partition model with zero consequents. Throws RuleExplosionError when
/// the rule count would exceed options.max_rules.
AnfisModel build_model(std::span<const InputSpec> inputs, int mf_count, MfFamily family, std::string output_name,
                       const BuildOptions &options = {});

/// Checks every structural invariant; throws Error(invariant) on violation.
void validate(const AnfisModel &model);

/// Maps a raw input vector into the coordinates the banks are defined in.
void scale_inputs(const AnfisModel &model, std::span<const double> x, std::span<double> features);

/// Evaluates a model sample by sample with reusable scratch buffers. Not
/// thread-safe; construct one per thread.
class RuleEvaluator {
 public:
  explicit RuleEvaluator(const AnfisModel &model);

  /// Fills memberships and firing strengths for an already-scaled feature
  /// vector and returns the sum of firing strengths.
  double evaluate(std::span<const double> features);

  /// Rule outputs f_i = row_i . [features, 1] for the last evaluated sample.
  void rule_outputs(std::span<const double> features, std::span<double> out) const;

  std::span<const double> strengths() const noexcept { return strengths_; }
  std::span<const double> memberships() const noexcept { return memberships_; }
  std::span<const std::size_t> bank_offsets() const noexcept { return offsets_; }
  /// Flat membership slot used by rule i on input k: mu_slot()[i * n + k].
  std::span<const std::size_t> mu_slot() const noexcept { return slots_; }

 private:
  const AnfisModel *model_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> slots_;
  std::vector<double> memberships_;
  std::vector<double> strengths_;
};

std::vector<double> firing_strengths(const AnfisModel &model, std::span<const double> x);
std::vector<double> normalize_strengths(std::span<const double> w);
double forward(const AnfisModel &model, std::span<const double> x);
std::vector<double> design_row(const AnfisModel &model, std::span<const double> x);

nlohmann::json to_json(const AnfisModel &model);
AnfisModel model_from_json(const nlohmann::json &doc);

void save_model(const AnfisModel &model, const std::filesystem::path &path);
AnfisModel load_model(const std::filesystem::path &path);

}  // namespace anfis
