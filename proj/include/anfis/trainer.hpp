#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "anfis/dataset.hpp"
#include "anfis/fis.hpp"

namespace anfis {

struct TrainConfig {
  int epochs = 700;
  double initial_step = 0.01;
  double step_increase = 1.1;
  double step_decrease = 0.9;
  double ridge_lambda = 1e-8;
  std::uint64_t seed = 0;
  bool normalize_inputs = true;
};

void validate(const TrainConfig &config);
nlohmann::json to_json(const TrainConfig &config);
TrainConfig train_config_from_json(const nlohmann::json &doc, TrainConfig base = {});

/// Stable 64-bit FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string digest(const TrainConfig &config);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_rmse = 0.0;
  double step = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> records;
  int best_epoch = 0;
};

struct LseResult {
  ConsequentMatrix consequents;
  double sse = 0.0;  // unregularised residual sum of squares
};

/// Ridge-regularised batch least squares for the consequent parameters with
/// the premises held fixed. X holds raw (unscaled) inputs, one row per sample.
LseResult fit_consequents_lse(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y,
                              double ridge_lambda);

/// Stacked design rows, samples x (rules * (n_inputs + 1)).
Table design_matrix(const AnfisModel &model, const Table &X);

/// d(SSE)/d(premise parameter) with consequents fixed, flattened bank by bank,
/// MF by MF, parameter by parameter.
std::vector<double> premise_gradient(const AnfisModel &model, const Table &X, const Eigen::VectorXd &y);

/// Flattened premise parameters in the same order as premise_gradient.
std::vector<double> premise_parameters(const AnfisModel &model);
void set_premise_parameters(AnfisModel &model, const std::vector<double> &params);

/// Clamps widths, re-sorts tri vertices and pulls centers back into range.
void project_premises(AnfisModel &model);

struct TrainResult {
  AnfisModel model;
  TrainTrace trace;
};

/// Called after each epoch's premise update with the 1-based epoch index.
using EpochObserver = std::function<void(int epoch, const AnfisModel &model)>;

/// Hybrid learning: per epoch an LSE solve for the consequents, then one
/// normalised gradient step on the premises with an adaptive step size. The
/// returned model is the lowest-RMSE snapshot, re-solved for its consequents.
TrainResult train(AnfisModel model, const Table &X, const Eigen::VectorXd &y, const TrainConfig &config,
                  const EpochObserver &observer = {});

/// Selects the model's input and output columns from `data` and trains.
TrainResult train(AnfisModel model, const Dataset &data, const TrainConfig &config);

}  // namespace anfis
