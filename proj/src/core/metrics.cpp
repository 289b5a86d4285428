#include "anfis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anfis/error.hpp"

namespace anfis {
namespace {

void check_lengths(std::span<const double> pred, std::span<const double> actual, std::size_t min_len) {
  if (pred.size() != actual.size()) {
    throw Error(ErrorCode::shape, "length mismatch: " + std::to_string(pred.size()) + " predictions vs " +
                                      std::to_string(actual.size()) + " targets");
  }
  if (pred.size() < min_len) {
    throw Error(ErrorCode::shape, "need at least " + std::to_string(min_len) + " samples");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double d : v) s += d;
  return s / static_cast<double>(v.size());
}

}  // namespace

RSquared r_squared(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual, 2);
  const double mp = mean(pred);
  const double ma = mean(actual);
  double ss_res = 0.0, ss_tot = 0.0, ss_pred = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = actual[i] - pred[i];
    const double da = actual[i] - ma;
    const double dp = pred[i] - mp;
    ss_res += r * r;
    ss_tot += da * da;
    ss_pred += dp * dp;
    cross += dp * da;
  }

  RSquared out;
  if (ss_tot == 0.0) {
    if (ss_res == 0.0) {
      out.determination = 1.0;
    } else {
      out.determination = -std::numeric_limits<double>::infinity();
      out.determination_undefined = true;
    }
  } else {
    out.determination = 1.0 - ss_res / ss_tot;
  }
  if (ss_tot == 0.0 || ss_pred == 0.0) {
    out.pearson_sq = 0.0;
    out.pearson_degenerate = true;
  } else {
    out.pearson_sq = std::clamp(cross * cross / (ss_tot * ss_pred), 0.0, 1.0);
  }
  return out;
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - actual[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
  return s / static_cast<double>(pred.size());
}

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> actual) {
  const auto r2 = r_squared(pred, actual);
  MetricReport m;
  m.r2_determination = r2.determination;
  m.r2_pearson = r2.pearson_sq;
  m.rmse = rmse(pred, actual);
  m.mae = mae(pred, actual);
  m.n = pred.size();
  m.degenerate = r2.pearson_degenerate || r2.determination_undefined;
  return m;
}

}  // namespace anfis
