#pragma once

#include <string>
#include <vector>

#include "anfis/dataset.hpp"
#include "anfis/fis.hpp"
#include "anfis/trainer.hpp"
#include "test_support.hpp"

namespace anfis::testing {

// One input on [0, 8] with two tri MFs and no input scaling. At x = 2 the
// degrees are 0.25 and 0.75; at x = 4 they are equal.
inline AnfisModel two_rule_tri_model(double p0, double t0, double p1, double t1) {
  AnfisModel m;
  m.inputs = {{"x", {0.0, 8.0}}};
  m.family = MfFamily::tri;
  m.normalize_inputs = false;
  m.banks = {MfBank{0, {0.0, 8.0}, {MfSpec{MfFamily::tri, {0.0, 8.0, 8.0}}, MfSpec{MfFamily::tri, {0.0, 0.0, 8.0}}}}};
  m.rules = {Rule{{0}}, Rule{{1}}};
  m.consequents.resize(2, 2);
  m.consequents << p0, t0, p1, t1;
  m.output_name = "y";
  return m;
}

inline std::vector<InputSpec> random_inputs(std::size_t n, Gen &g) {
  std::vector<InputSpec> inputs;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = g.uniform(-5.0, 5.0);
    inputs.push_back({"in" + std::to_string(k), {lo, lo + g.uniform(0.5, 10.0)}});
  }
  return inputs;
}

// Grid-partition model with jittered premises and random consequents.
inline AnfisModel random_model(std::size_t n_inputs, int mf_count, MfFamily family, Gen &g,
                               bool normalize = true) {
  auto model = build_model(random_inputs(n_inputs, g), mf_count, family, "out", {.normalize_inputs = normalize});
  auto params = premise_parameters(model);
  for (auto &p : params) p *= 1.0 + g.uniform(-0.05, 0.05);
  set_premise_parameters(model, params);
  project_premises(model);
  for (Eigen::Index i = 0; i < model.consequents.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.consequents.cols(); ++j) model.consequents(i, j) = g.uniform(-3.0, 3.0);
  }
  return model;
}

inline Table random_points(const AnfisModel &model, std::size_t n, Gen &g) {
  Table X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.n_inputs()));
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      const auto &r = model.inputs[static_cast<std::size_t>(k)].range;
      X(s, k) = g.uniform(r.lo, r.hi);
    }
  }
  return X;
}

inline std::vector<double> row(const Table &X, Eigen::Index s) {
  return {X.row(s).data(), X.row(s).data() + X.cols()};
}

inline Eigen::VectorXd forward_all(const AnfisModel &model, const Table &X) {
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index s = 0; s < X.rows(); ++s) y(s) = forward(model, row(X, s));
  return y;
}

}  // namespace anfis::testing
