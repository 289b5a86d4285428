#include "anfis/fis.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "anfis/error.hpp"

namespace anfis {

using nlohmann::json;

std::size_t AnfisModel::premise_param_count() const noexcept {
  std::size_t total = 0;
  for (const auto &bank : banks) {
    for (const auto &mf : bank.mfs) total += mf.params.size();
  }
  return total;
}

bool AnfisModel::operator==(const AnfisModel &other) const {
  return inputs == other.inputs && family == other.family && banks == other.banks && rules == other.rules &&
         consequents.rows() == other.consequents.rows() && consequents.cols() == other.consequents.cols() &&
         consequents == other.consequents && output_name == other.output_name &&
         normalize_inputs == other.normalize_inputs && provenance == other.provenance;
}

std::size_t grid_rule_count(std::size_t n_inputs, int mf_count) noexcept {
  if (mf_count <= 0) return 0;
  std::size_t count = 1;
  const auto m = static_cast<std::size_t>(mf_count);
  for (std::size_t k = 0; k < n_inputs; ++k) {
    if (count > std::numeric_limits<std::size_t>::max() / m) return std::numeric_limits<std::size_t>::max();
    count *= m;
  }
  return count;
}

AnfisModel build_model(std::span<const InputSpec> inputs, int mf_count, MfFamily family, std::string output_name,
                       const BuildOptions &options) {
  if (inputs.empty()) throw Error(ErrorCode::configuration, "model needs at least one input");
  if (mf_count < 2) throw Error(ErrorCode::configuration, "membership count must be at least 2");
  const std::size_t n_rules = grid_rule_count(inputs.size(), mf_count);
  if (n_rules > options.max_rules) throw RuleExplosionError(n_rules, options.max_rules);

  AnfisModel model;
  model.inputs.assign(inputs.begin(), inputs.end());
  model.family = family;
  model.output_name = std::move(output_name);
  model.normalize_inputs = options.normalize_inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!(inputs[k].range.lo < inputs[k].range.hi)) {
      throw Error(ErrorCode::configuration, "input '" + inputs[k].column_name + "' has an empty range");
    }
    const Interval range = options.normalize_inputs ? Interval{0.0, 1.0} : inputs[k].range;
    model.banks.push_back(make_mf_bank(k, range, mf_count, family));
  }

  // Row-major cartesian product: the last input varies fastest.
  const std::size_t n = inputs.size();
  model.rules.reserve(n_rules);
  std::vector<std::uint32_t> idx(n, 0);
  for (std::size_t r = 0; r < n_rules; ++r) {
    model.rules.push_back(Rule{idx});
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < static_cast<std::uint32_t>(mf_count)) break;
      idx[k] = 0;
    }
  }
  model.consequents = ConsequentMatrix::Zero(static_cast<Eigen::Index>(n_rules), static_cast<Eigen::Index>(n + 1));
  return model;
}

void validate(const AnfisModel &model) {
  const std::size_t n = model.n_inputs();
  if (n == 0) throw Error(ErrorCode::invariant, "model has no inputs");
  if (model.banks.size() != n) throw Error(ErrorCode::invariant, "bank count differs from input count");
  std::size_t grid = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const auto &in = model.inputs[k];
    if (!(in.range.lo < in.range.hi) || !std::isfinite(in.range.lo) || !std::isfinite(in.range.hi)) {
      throw Error(ErrorCode::invariant, "input '" + in.column_name + "' range must satisfy lo < hi");
    }
    const auto &bank = model.banks[k];
    if (bank.input_index != k) throw Error(ErrorCode::invariant, "bank order differs from input order");
    try {
      validate(bank);
    } catch (const Error &e) {
      throw Error(ErrorCode::invariant, e.what());
    }
    for (const auto &mf : bank.mfs) {
      if (mf.family != model.family) throw Error(ErrorCode::invariant, "bank mixes membership families");
    }
    grid *= bank.mfs.size();
  }
  if (model.rules.size() != grid) {
    throw Error(ErrorCode::invariant, "rule count " + std::to_string(model.rules.size()) +
                                          " differs from grid-partition count " + std::to_string(grid));
  }
  std::set<std::vector<std::uint32_t>> seen;
  for (const auto &rule : model.rules) {
    if (rule.mf_index.size() != n) throw Error(ErrorCode::invariant, "rule antecedent length differs from input count");
    for (std::size_t k = 0; k < n; ++k) {
      if (rule.mf_index[k] >= model.banks[k].mfs.size()) throw Error(ErrorCode::invariant, "rule MF index out of range");
    }
    if (!seen.insert(rule.mf_index).second) throw Error(ErrorCode::invariant, "duplicate rule antecedent");
  }
  if (static_cast<std::size_t>(model.consequents.rows()) != model.rules.size() ||
      static_cast<std::size_t>(model.consequents.cols()) != n + 1) {
    throw Error(ErrorCode::invariant, "consequent matrix must be " + std::to_string(model.rules.size()) + " x " +
                                          std::to_string(n + 1));
  }
  if (!model.consequents.allFinite()) throw Error(ErrorCode::invariant, "non-finite consequent");
}

namespace {

void check_point(const AnfisModel &model, std::span<const double> x) {
  if (x.size() != model.n_inputs()) {
    throw Error(ErrorCode::shape,
                "expected " + std::to_string(model.n_inputs()) + " inputs, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::data, "non-finite input value");
  }
}

}  // namespace

void scale_inputs(const AnfisModel &model, std::span<const double> x, std::span<double> features) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto &r = model.inputs[k].range;
    features[k] = model.normalize_inputs ? (x[k] - r.lo) / (r.hi - r.lo) : x[k];
  }
}

RuleEvaluator::RuleEvaluator(const AnfisModel &model) : model_(&model) {
  const std::size_t n = model.n_inputs();
  offsets_.resize(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) offsets_[k + 1] = offsets_[k] + model.banks[k].mfs.size();
  slots_.resize(model.rule_count() * n);
  for (std::size_t i = 0; i < model.rule_count(); ++i) {
    for (std::size_t k = 0; k < n; ++k) slots_[i * n + k] = offsets_[k] + model.rules[i].mf_index[k];
  }
  memberships_.resize(offsets_[n]);
  strengths_.resize(model.rule_count());
}

double RuleEvaluator::evaluate(std::span<const double> features) {
  const auto &model = *model_;
  const std::size_t n = model.n_inputs();
  for (std::size_t k = 0; k < n; ++k) {
    const auto &mfs = model.banks[k].mfs;
    for (std::size_t j = 0; j < mfs.size(); ++j) memberships_[offsets_[k] + j] = eval_unchecked(mfs[j], features[k]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < strengths_.size(); ++i) {
    double w = 1.0;
    const std::size_t *slot = &slots_[i * n];
    for (std::size_t k = 0; k < n; ++k) w *= memberships_[slot[k]];
    strengths_[i] = w;
    sum += w;
  }
  return sum;
}

void RuleEvaluator::rule_outputs(std::span<const double> features, std::span<double> out) const {
  const auto &c = model_->consequents;
  const std::size_t n = model_->n_inputs();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    double f = c(row, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) f += c(row, static_cast<Eigen::Index>(k)) * features[k];
    out[i] = f;
  }
}

std::vector<double> firing_strengths(const AnfisModel &model, std::span<const double> x) {
  check_point(model, x);
  std::vector<double> features(x.size());
  scale_inputs(model, x, features);
  RuleEvaluator ev(model);
  ev.evaluate(features);
  return {ev.strengths().begin(), ev.strengths().end()};
}

std::vector<double> normalize_strengths(std::span<const double> w) {
  if (w.empty()) throw Error(ErrorCode::shape, "cannot normalize an empty strength vector");
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) throw Error(ErrorCode::data, "firing strengths must be positive");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / sum;
  return out;
}

double forward(const AnfisModel &model, std::span<const double> x) {
  const auto row = design_row(model, x);
  const Eigen::Map<const Eigen::VectorXd> r(row.data(), static_cast<Eigen::Index>(row.size()));
  const Eigen::Map<const Eigen::VectorXd> theta(model.consequents.data(), model.consequents.size());
  return r.dot(theta);
}

std::vector<double> design_row(const AnfisModel &model, std::span<const double> x) {
  check_point(model, x);
  const std::size_t n = model.n_inputs();
  std::vector<double> features(n);
  scale_inputs(model, x, features);
  RuleEvaluator ev(model);
  const double sum = ev.evaluate(features);
  std::vector<double> row(model.coefficient_count());
  const auto w = ev.strengths();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double wbar = w[i] / sum;
    double *block = &row[i * (n + 1)];
    for (std::size_t k = 0; k < n; ++k) block[k] = wbar * features[k];
    block[n] = wbar;
  }
  return row;
}

// ---------------------------------------------------------------------------
// Model file

json to_json(const AnfisModel &model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["output_name"] = model.output_name;
  doc["family"] = std::string(to_string(model.family));
  doc["input_scaling"] = model.normalize_inputs ? "minmax" : "none";
  auto &inputs = doc["inputs"] = json::array();
  for (const auto &in : model.inputs) inputs.push_back({{"name", in.column_name}, {"lo", in.range.lo}, {"hi", in.range.hi}});
  auto &banks = doc["banks"] = json::array();
  for (const auto &bank : model.banks) {
    json b = json::array();
    for (const auto &mf : bank.mfs) b.push_back(mf.params);
    banks.push_back(std::move(b));
  }
  auto &rules = doc["rules"] = json::array();
  for (const auto &rule : model.rules) rules.push_back(rule.mf_index);
  auto &cons = doc["consequents"] = json::array();
  for (Eigen::Index i = 0; i < model.consequents.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < model.consequents.cols(); ++j) row.push_back(model.consequents(i, j));
    cons.push_back(std::move(row));
  }
  doc["provenance"] = model.provenance;
  return doc;
}

namespace {

[[noreturn]] void parse_fail(const std::string &field, const std::string &what) {
  throw Error(ErrorCode::parse, "model file: field '" + field + "': " + what);
}

const json &require(const json &obj, const char *key, const std::string &path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double as_real(const json &v, const std::string &field) {
  if (!v.is_number()) parse_fail(field, "expected a number");
  return v.get<double>();
}

std::string as_text(const json &v, const std::string &field) {
  if (!v.is_string()) parse_fail(field, "expected a string");
  return v.get<std::string>();
}

const json &as_array(const json &v, const std::string &field) {
  if (!v.is_array()) parse_fail(field, "expected an array");
  return v;
}

}  // namespace

AnfisModel model_from_json(const json &doc) {
  if (!doc.is_object()) parse_fail("<root>", "expected an object");
  const auto &version = require(doc, "format_version", "");
  if (!version.is_number_integer()) parse_fail("format_version", "expected an integer");
  if (version.get<long long>() != kModelFormatVersion) {
    throw Error(ErrorCode::version, "model file: format_version " + version.dump() + " is not supported (expected " +
                                        std::to_string(kModelFormatVersion) + ")");
  }

  AnfisModel model;
  model.output_name = as_text(require(doc, "output_name", ""), "output_name");
  {
    const auto name = as_text(require(doc, "family", ""), "family");
    try {
      model.family = parse_family(name);
    } catch (const Error &) {
      parse_fail("family", "unknown membership family '" + name + "'");
    }
  }
  if (auto it = doc.find("input_scaling"); it != doc.end()) {
    const auto scaling = as_text(*it, "input_scaling");
    if (scaling == "minmax") {
      model.normalize_inputs = true;
    } else if (scaling == "none") {
      model.normalize_inputs = false;
    } else {
      parse_fail("input_scaling", "expected 'minmax' or 'none'");
    }
  }

  const auto &inputs = as_array(require(doc, "inputs", ""), "inputs");
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::string path = "inputs[" + std::to_string(k) + "]";
    InputSpec in;
    in.column_name = as_text(require(inputs[k], "name", path), path + ".name");
    in.range.lo = as_real(require(inputs[k], "lo", path), path + ".lo");
    in.range.hi = as_real(require(inputs[k], "hi", path), path + ".hi");
    model.inputs.push_back(std::move(in));
  }

  const auto &banks = as_array(require(doc, "banks", ""), "banks");
  if (banks.size() != model.inputs.size()) {
    throw Error(ErrorCode::invariant, "model file: bank count differs from input count");
  }
  for (std::size_t k = 0; k < banks.size(); ++k) {
    const std::string path = "banks[" + std::to_string(k) + "]";
    MfBank bank;
    bank.input_index = k;
    bank.range = model.normalize_inputs ? Interval{0.0, 1.0} : model.inputs[k].range;
    for (std::size_t j = 0; j < as_array(banks[k], path).size(); ++j) {
      const std::string mpath = path + "[" + std::to_string(j) + "]";
      MfSpec mf{model.family, {}};
      for (const auto &p : as_array(banks[k][j], mpath)) mf.params.push_back(as_real(p, mpath));
      bank.mfs.push_back(std::move(mf));
    }
    model.banks.push_back(std::move(bank));
  }

  const auto &rules = as_array(require(doc, "rules", ""), "rules");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::string path = "rules[" + std::to_string(i) + "]";
    Rule rule;
    for (const auto &v : as_array(rules[i], path)) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        parse_fail(path, "expected non-negative integers");
      }
      rule.mf_index.push_back(v.get<std::uint32_t>());
    }
    model.rules.push_back(std::move(rule));
  }

  const auto &cons = as_array(require(doc, "consequents", ""), "consequents");
  if (cons.size() != model.rules.size()) {
    throw Error(ErrorCode::invariant, "model file: consequent row count " + std::to_string(cons.size()) +
                                          " differs from rule count " + std::to_string(model.rules.size()));
  }
  const auto width = static_cast<Eigen::Index>(model.inputs.size() + 1);
  model.consequents.resize(static_cast<Eigen::Index>(cons.size()), width);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string path = "consequents[" + std::to_string(i) + "]";
    const auto &row = as_array(cons[i], path);
    if (static_cast<Eigen::Index>(row.size()) != width) {
      throw Error(ErrorCode::invariant, "model file: " + path + " must have " + std::to_string(width) + " entries");
    }
    for (Eigen::Index j = 0; j < width; ++j) {
      model.consequents(static_cast<Eigen::Index>(i), j) = as_real(row[static_cast<std::size_t>(j)], path);
    }
  }

  if (auto it = doc.find("provenance"); it != doc.end()) {
    if (!it->is_object()) parse_fail("provenance", "expected an object");
    model.provenance = *it;
  }
  validate(model);
  return model;
}

void save_model(const AnfisModel &model, const std::filesystem::path &path) {
  validate(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

AnfisModel load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::parse, "model file '" + path.string() + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace anfis
