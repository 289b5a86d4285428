#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "anfis/metrics.hpp"
#include "error_support.hpp"
#include "test_support.hpp"

using namespace anfis;
using anfis::testing::Gen;
using anfis::testing::thrown_code;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

using Vec = std::vector<double>;

TEST_CASE("R squared at reference points") {
  const Vec a = {1.0, 2.0, 3.0};
  CHECK(r_squared(a, a).determination == 1.0);
  CHECK_THAT(r_squared(a, a).pearson_sq, WithinAbs(1.0, 1e-15));

  const Vec mean = {2.0, 2.0, 2.0};
  CHECK(r_squared(mean, a).determination == 0.0);
  CHECK(r_squared(mean, a).pearson_degenerate);

  const Vec actual = {1.0, 2.0, 4.0};
  CHECK_THAT(r_squared(a, actual).determination, WithinAbs(11.0 / 14.0, 1e-15));
}

TEST_CASE("error magnitudes") {
  const Vec actual = {0.0, 0.0}, pred = {3.0, -4.0};
  CHECK_THAT(rmse(pred, actual), WithinAbs(3.5355339059327378, 1e-15));
  CHECK(mae(pred, actual) == 3.5);
  const Vec one = {2.0}, other = {5.0};
  CHECK(rmse(one, other) == 3.0);
  CHECK(mae(one, other) == 3.0);
}

TEST_CASE("degenerate and malformed inputs") {
  const Vec constant = {4.0, 4.0, 4.0};
  const Vec off = {4.0, 5.0, 4.0};
  const auto r = r_squared(off, constant);
  CHECK(r.determination_undefined);
  CHECK(std::isinf(r.determination));
  CHECK(r.pearson_degenerate);
  CHECK(r.pearson_sq == 0.0);

  const auto exact = r_squared(constant, constant);
  CHECK_FALSE(exact.determination_undefined);
  CHECK(exact.determination == 1.0);

  CHECK(evaluate_metrics(off, constant).degenerate);
  CHECK_FALSE(evaluate_metrics(Vec{1.0, 2.0, 4.0}, Vec{1.0, 2.0, 3.0}).degenerate);

  CHECK(thrown_code([] { (void)r_squared(Vec{1.0}, Vec{1.0}); }) == ErrorCode::shape);
  CHECK(thrown_code([] { (void)r_squared(Vec{1.0, 2.0}, Vec{1.0}); }) == ErrorCode::shape);
  CHECK(thrown_code([] { (void)rmse(Vec{}, Vec{}); }) == ErrorCode::shape);
  CHECK(thrown_code([] { (void)mae(Vec{1.0}, Vec{}); }) == ErrorCode::shape);
}

TEST_CASE("metric report bundles both conventions") {
  const Vec actual = {1.0, 2.0, 3.0, 4.0}, pred = {1.1, 1.9, 3.2, 3.9};
  const auto m = evaluate_metrics(pred, actual);
  CHECK(m.n == 4);
  CHECK(m.r2_determination == r_squared(pred, actual).determination);
  CHECK(m.r2_pearson == r_squared(pred, actual).pearson_sq);
  CHECK(m.rmse == rmse(pred, actual));
  CHECK(m.mae == mae(pred, actual));
}

namespace {

Vec random_vec(Gen &g, std::size_t n) {
  Vec v(n);
  for (auto &x : v) x = g.uniform(-100.0, 100.0);
  return v;
}

}  // namespace

TEST_CASE("metric properties") {
  Gen g(60);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(2, 60));
    const Vec actual = random_vec(g, n);
    Vec pred = actual;
    for (auto &p : pred) p += g.uniform(-30.0, 30.0);

    CHECK(rmse(pred, actual) >= mae(pred, actual));
    const auto base = r_squared(pred, actual);
    CHECK(base.determination <= 1.0);
    CHECK(base.pearson_sq >= 0.0);
    CHECK(base.pearson_sq <= 1.0 + 1e-12);

    // Pearson is invariant to affine maps of the prediction with nonzero slope.
    const double a = g.sign() * g.uniform(0.1, 10.0), b = g.uniform(-50.0, 50.0);
    Vec mapped = pred;
    for (auto &p : mapped) p = a * p + b;
    CHECK_THAT(r_squared(mapped, actual).pearson_sq, WithinAbs(base.pearson_sq, 1e-10));

    // For the least-squares affine fit of actual on pred both conventions agree.
    double mp = 0.0, ma = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mp += pred[i];
      ma += actual[i];
    }
    mp /= static_cast<double>(n);
    ma /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (pred[i] - mp) * (actual[i] - ma);
      sxx += (pred[i] - mp) * (pred[i] - mp);
    }
    Vec fitted(n);
    for (std::size_t i = 0; i < n; ++i) fitted[i] = ma + sxy / sxx * (pred[i] - mp);
    const auto lsq = r_squared(fitted, actual);
    CHECK_THAT(lsq.determination, WithinAbs(lsq.pearson_sq, 1e-10));
    CHECK_THAT(lsq.pearson_sq, WithinAbs(base.pearson_sq, 1e-10));
  }
}
