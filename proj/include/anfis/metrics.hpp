#pragma once

#include <cstddef>
#include <span>

namespace anfis {

struct RSquared {
  double determination = 0.0;  // 1 - SS_res / SS_tot
  double pearson_sq = 0.0;     // squared sample correlation
  /// Set when actual (or pred, for pearson) is constant; pearson_sq is then 0.
  bool pearson_degenerate = false;
  /// Set when actual is constant and pred differs from it; determination is
  /// then -infinity.
  bool determination_undefined = false;
};

/// Throws Error(shape) on length mismatch or fewer than two samples.
RSquared r_squared(std::span<const double> pred, std::span<const double> actual);

double rmse(std::span<const double> pred, std::span<const double> actual);
double mae(std::span<const double> pred, std::span<const double> actual);

struct MetricReport {
  double r2_determination = 0.0;
  double r2_pearson = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
};

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> actual);

}  // namespace anfis
