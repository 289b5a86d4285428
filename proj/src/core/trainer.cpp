#include "anfis/trainer.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "anfis/error.hpp"

namespace anfis {

using nlohmann::json;

void validate(const TrainConfig &c) {
  if (c.epochs < 1) throw Error(ErrorCode::configuration, "epochs must be at least 1");
  if (!(c.initial_step > 0.0) || !std::isfinite(c.initial_step)) {
    throw Error(ErrorCode::configuration, "initial step must be positive");
  }
  if (!(c.step_decrease > 0.0 && c.step_decrease < 1.0 && c.step_increase > 1.0) || !std::isfinite(c.step_increase)) {
    throw Error(ErrorCode::configuration, "step factors must satisfy 0 < decrease < 1 < increase");
  }
  if (!(c.ridge_lambda >= 0.0) || !std::isfinite(c.ridge_lambda)) {
    throw Error(ErrorCode::configuration, "ridge lambda must be >= 0");
  }
}

json to_json(const TrainConfig &c) {
  return {{"epochs", c.epochs},
          {"initial_step", c.initial_step},
          {"step_increase", c.step_increase},
          {"step_decrease", c.step_decrease},
          {"ridge_lambda", c.ridge_lambda},
          {"seed", c.seed},
          {"normalize_inputs", c.normalize_inputs}};
}

TrainConfig train_config_from_json(const json &doc, TrainConfig base) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "train config must be an object");
  for (const auto &[key, value] : doc.items()) {
    try {
      if (key == "epochs") base.epochs = value.get<int>();
      else if (key == "initial_step") base.initial_step = value.get<double>();
      else if (key == "step_increase") base.step_increase = value.get<double>();
      else if (key == "step_decrease") base.step_decrease = value.get<double>();
      else if (key == "ridge_lambda") base.ridge_lambda = value.get<double>();
      else if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "normalize_inputs") base.normalize_inputs = value.get<bool>();
      else throw Error(ErrorCode::parse, "train config: unknown field '" + key + "'");
    } catch (const json::exception &) {
      throw Error(ErrorCode::parse, "train config: field '" + key + "' has the wrong type");
    }
  }
  validate(base);
  return base;
}

std::string digest(const TrainConfig &config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void check_data(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y) {
  if (X.rows() < 1) throw Error(ErrorCode::data, "training data is empty");
  if (static_cast<std::size_t>(X.cols()) != model.n_inputs()) {
    throw Error(ErrorCode::shape, "sample matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                                      std::to_string(model.n_inputs()));
  }
  if (y.size() != X.rows()) throw Error(ErrorCode::shape, "target length differs from sample count");
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::data, "training data contains non-finite values");
}

Table scaled_features(const AnfisModel &model, const Table &X) {
  Table F(X.rows(), X.cols());
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    scale_inputs(model, std::span<const double>(X.row(s).data(), static_cast<std::size_t>(X.cols())),
                 std::span<double>(F.row(s).data(), static_cast<std::size_t>(F.cols())));
  }
  return F;
}

void fill_design(const AnfisModel &model, const Table &F, Table &D) {
  const std::size_t n = model.n_inputs();
  const auto width = static_cast<Eigen::Index>(model.coefficient_count());
  D.resize(F.rows(), width);
  RuleEvaluator ev(model);
  for (Eigen::Index s = 0; s < F.rows(); ++s) {
    const std::span<const double> f(F.row(s).data(), n);
    const double sum = ev.evaluate(f);
    const auto w = ev.strengths();
    double *row = D.row(s).data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double wbar = w[i] / sum;
      double *block = row + i * (n + 1);
      for (std::size_t k = 0; k < n; ++k) block[k] = wbar * f[k];
      block[n] = wbar;
    }
  }
}

// Normal-equation workspace reused across epochs.
struct LseSolver {
  Table design;
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;

  LseResult solve(const AnfisModel &model, const Table &F, const Eigen::VectorXd &y, double lambda) {
    fill_design(model, F, design);
    const Eigen::Index p = design.cols();
    gram.setZero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    gram.diagonal().array() += lambda;
    rhs.noalias() = design.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(gram);
    const Eigen::VectorXd theta = ldlt.solve(rhs);

    LseResult out;
    out.sse = (y - design * theta).squaredNorm();
    if (!theta.allFinite() || !std::isfinite(out.sse)) {
      throw Error(ErrorCode::data, "least-squares solve produced non-finite consequents");
    }
    const auto cols = static_cast<Eigen::Index>(model.n_inputs() + 1);
    out.consequents = Eigen::Map<const ConsequentMatrix>(theta.data(), p / cols, cols);
    return out;
  }
};

// Gradient of SSE over scaled features. Returns the SSE as a by-product.
double premise_gradient_scaled(const AnfisModel &model, const Table &F, const Eigen::VectorXd &y,
                               std::vector<double> &grad) {
  const std::size_t n = model.n_inputs();
  const std::size_t n_rules = model.rule_count();
  RuleEvaluator ev(model);
  const auto offsets = ev.bank_offsets();
  const auto slots = ev.mu_slot();

  // Parameter offset for each membership slot.
  std::vector<std::size_t> param_offset;
  std::vector<const MfSpec *> slot_mf;
  std::size_t total = 0;
  for (const auto &bank : model.banks) {
    for (const auto &mf : bank.mfs) {
      param_offset.push_back(total);
      slot_mf.push_back(&mf);
      total += mf.params.size();
    }
  }
  grad.assign(total, 0.0);

  std::vector<double> outputs(n_rules);
  std::vector<double> acc(offsets[n]);
  std::array<double, 4> mf_grad{};
  double sse = 0.0;
  for (Eigen::Index s = 0; s < F.rows(); ++s) {
    const std::span<const double> f(F.row(s).data(), n);
    const double sum = ev.evaluate(f);
    ev.rule_outputs(f, outputs);
    const auto w = ev.strengths();
    double yhat = 0.0;
    for (std::size_t i = 0; i < n_rules; ++i) yhat += w[i] * outputs[i];
    yhat /= sum;
    const double err = y(s) - yhat;
    sse += err * err;

    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < n_rules; ++i) {
      const double coef = w[i] / sum * (outputs[i] - yhat);
      const std::size_t *slot = &slots[i * n];
      for (std::size_t k = 0; k < n; ++k) acc[slot[k]] += coef;
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t m = offsets[k]; m < offsets[k + 1]; ++m) {
        const MfSpec &mf = *slot_mf[m];
        const std::span<double> g(mf_grad.data(), mf.params.size());
        const double mu = eval_grad_unchecked(mf, f[k], g);
        const double scale = -2.0 * err * acc[m] / mu;
        for (std::size_t q = 0; q < g.size(); ++q) grad[param_offset[m] + q] += scale * g[q];
      }
    }
  }
  return sse;
}

}  // namespace

Table design_matrix(const AnfisModel &model, const Table &X) {
  if (static_cast<std::size_t>(X.cols()) != model.n_inputs()) throw Error(ErrorCode::shape, "input width mismatch");
  Table D;
  fill_design(model, scaled_features(model, X), D);
  return D;
}

LseResult fit_consequents_lse(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y,
                              double ridge_lambda) {
  check_data(model, X, y);
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::configuration, "ridge lambda must be >= 0");
  LseSolver solver;
  return solver.solve(model, scaled_features(model, X), y, ridge_lambda);
}

std::vector<double> premise_gradient(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y) {
  check_data(model, X, y);
  std::vector<double> grad;
  premise_gradient_scaled(model, scaled_features(model, X), y, grad);
  return grad;
}

std::vector<double> premise_parameters(const AnfisModel &model) {
  std::vector<double> out;
  out.reserve(model.premise_param_count());
  for (const auto &bank : model.banks) {
    for (const auto &mf : bank.mfs) out.insert(out.end(), mf.params.begin(), mf.params.end());
  }
  return out;
}

void set_premise_parameters(AnfisModel &model, const std::vector<double> &params) {
  if (params.size() != model.premise_param_count()) throw Error(ErrorCode::shape, "premise parameter count mismatch");
  std::size_t at = 0;
  for (auto &bank : model.banks) {
    for (auto &mf : bank.mfs) {
      for (auto &p : mf.params) p = params[at++];
    }
  }
}

void project_premises(AnfisModel &model) {
  for (auto &bank : model.banks) {
    const double min_width = 1e-6 * bank.range.width();
    for (auto &mf : bank.mfs) project_into_domain(mf, bank.range, min_width);
  }
}

TrainResult train(AnfisModel model, const Table &X, const Eigen::VectorXd &y, const TrainConfig &config,
                  const EpochObserver &observer) {
  validate(config);
  validate(model);
  check_data(model, X, y);
  if (model.normalize_inputs != config.normalize_inputs) {
    throw Error(ErrorCode::configuration, "model input scaling differs from the training configuration");
  }

  const Table F = scaled_features(model, X);
  const double n = static_cast<double>(X.rows());
  LseSolver solver;
  TrainTrace trace;
  trace.records.reserve(static_cast<std::size_t>(config.epochs));

  double step = config.initial_step;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::vector<double> best_premises = premise_parameters(model);
  std::vector<double> grad;
  std::vector<double> history;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto lse = solver.solve(model, F, y, config.ridge_lambda);
    model.consequents = std::move(lse.consequents);
    const double rmse = std::sqrt(lse.sse / n);
    trace.records.push_back({epoch, rmse, step});
    if (rmse < best_rmse) {
      best_rmse = rmse;
      trace.best_epoch = epoch;
      best_premises = premise_parameters(model);
    }
    if (epoch == config.epochs) {
      if (observer) observer(epoch, model);
      break;
    }

    premise_gradient_scaled(model, F, y, grad);
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    norm = std::sqrt(norm);
    if (norm > 0.0 && std::isfinite(norm)) {
      auto params = premise_parameters(model);
      for (std::size_t q = 0; q < params.size(); ++q) params[q] -= step * grad[q] / norm;
      set_premise_parameters(model, params);
      project_premises(model);
    }
    if (observer) observer(epoch, model);

    // Step-size heuristic over the last five errors: four straight decreases
    // grow the step, two down-up oscillations shrink it.
    history.push_back(rmse);
    if (history.size() >= 5) {
      const auto h = history.end() - 5;
      const bool decreasing = h[0] > h[1] && h[1] > h[2] && h[2] > h[3] && h[3] > h[4];
      const bool oscillating = h[0] > h[1] && h[1] < h[2] && h[2] > h[3] && h[3] < h[4];
      if (decreasing) step *= config.step_increase;
      if (oscillating) step *= config.step_decrease;
    }
  }

  set_premise_parameters(model, best_premises);
  auto lse = solver.solve(model, F, y, config.ridge_lambda);
  model.consequents = std::move(lse.consequents);

  model.provenance["seed"] = config.seed;
  model.provenance["train_config"] = to_json(config);
  model.provenance["train_config_digest"] = digest(config);
  model.provenance["epochs"] = config.epochs;
  model.provenance["best_epoch"] = trace.best_epoch;
  model.provenance["train_rows"] = X.rows();
  model.provenance["final_train_rmse"] = std::sqrt(lse.sse / n);
  return {std::move(model), std::move(trace)};
}

TrainResult train(AnfisModel model, const Dataset &data, const TrainConfig &config) {
  std::vector<std::string> names;
  for (const auto &in : model.inputs) names.push_back(in.column_name);
  const Table X = select_columns(data, names);
  const auto out = data.find_column(model.output_name);
  if (!out) throw Error(ErrorCode::selection, "unknown output column '" + model.output_name + "'");
  const Eigen::VectorXd y = data.values().col(static_cast<Eigen::Index>(*out));
  return train(std::move(model), X, y, config);
}

}  // namespace anfis
