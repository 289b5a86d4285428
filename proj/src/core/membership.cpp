#include "anfis/membership.hpp"

#include <algorithm>
#include <cmath>

#include "anfis/error.hpp"

namespace anfis {
namespace {

struct Sigmoid {
  double value;  // sig(x; a, c)
  double slope;  // sig * (1 - sig), computed without cancellation
};

Sigmoid sigmoid(double a, double c, double x) noexcept {
  const double z = a * (x - c);
  const double e = std::exp(-std::abs(z));
  const double s = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  return {s, e / ((1.0 + e) * (1.0 + e))};
}

struct GaussBranch {
  double value;
  double d_sigma;
  double d_center;
};

GaussBranch gauss_branch(double sigma, double c, double x) noexcept {
  const double d = x - c;
  const double v = std::exp(-d * d / (2.0 * sigma * sigma));
  return {v, v * d * d / (sigma * sigma * sigma), v * d / (sigma * sigma)};
}

// Raw (unclamped) degree plus optional gradient.
double eval_raw(const MfSpec &mf, double x, double *g) noexcept {
  const auto &p = mf.params;
  switch (mf.family) {
    case MfFamily::gbell: {
      const double a = p[0], b = p[1], c = p[2];
      const double d = x - c;
      if (d == 0.0) {
        if (g) g[0] = g[1] = g[2] = 0.0;
        return 1.0;
      }
      const double u = std::abs(d / a);
      const double t = std::pow(u, 2.0 * b);
      const double f = 1.0 / (1.0 + t);
      if (g) {
        const double df_dt = -f * f;
        g[0] = df_dt * (-2.0 * b * t / a);
        g[1] = df_dt * (2.0 * t * std::log(u));
        g[2] = df_dt * (-2.0 * b * t / d);
      }
      return f;
    }
    case MfFamily::gauss: {
      const auto br = gauss_branch(p[0], p[1], x);
      if (g) {
        g[0] = br.d_sigma;
        g[1] = br.d_center;
      }
      return br.value;
    }
    case MfFamily::gauss2: {
      GaussBranch left{1.0, 0.0, 0.0};
      GaussBranch right{1.0, 0.0, 0.0};
      if (x < p[1]) left = gauss_branch(p[0], p[1], x);
      if (x > p[3]) right = gauss_branch(p[2], p[3], x);
      if (g) {
        g[0] = left.d_sigma * right.value;
        g[1] = left.d_center * right.value;
        g[2] = right.d_sigma * left.value;
        g[3] = right.d_center * left.value;
      }
      return left.value * right.value;
    }
    case MfFamily::dsig:
    case MfFamily::psig: {
      const auto s1 = sigmoid(p[0], p[1], x);
      const auto s2 = sigmoid(p[2], p[3], x);
      const double ds1_da = s1.slope * (x - p[1]);
      const double ds1_dc = -p[0] * s1.slope;
      const double ds2_da = s2.slope * (x - p[3]);
      const double ds2_dc = -p[2] * s2.slope;
      if (mf.family == MfFamily::dsig) {
        if (g) {
          g[0] = ds1_da;
          g[1] = ds1_dc;
          g[2] = -ds2_da;
          g[3] = -ds2_dc;
        }
        return s1.value - s2.value;
      }
      if (g) {
        g[0] = ds1_da * s2.value;
        g[1] = ds1_dc * s2.value;
        g[2] = ds2_da * s1.value;
        g[3] = ds2_dc * s1.value;
      }
      return s1.value * s2.value;
    }
    case MfFamily::tri: {
      const double a = p[0], b = p[1], c = p[2];
      if (g) g[0] = g[1] = g[2] = 0.0;
      if (x == b) return 1.0;
      if (x < b) {
        if (x <= a) return 0.0;
        const double span = b - a;
        if (g) {
          g[0] = (x - b) / (span * span);
          g[1] = -(x - a) / (span * span);
        }
        return (x - a) / span;
      }
      if (x >= c) return 0.0;
      const double span = c - b;
      if (g) {
        g[1] = (c - x) / (span * span);
        g[2] = (x - b) / (span * span);
      }
      return (c - x) / span;
    }
  }
  return 0.0;
}

bool all_finite(const std::vector<double> &v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

[[noreturn]] void domain_error(const MfSpec &mf, const std::string &what) {
  throw Error(ErrorCode::parameter_domain, std::string(to_string(mf.family)) + ": " + what);
}

}  // namespace

std::string_view to_string(MfFamily family) noexcept {
  switch (family) {
    case MfFamily::gbell: return "gbell";
    case MfFamily::gauss: return "gauss";
    case MfFamily::gauss2: return "gauss2";
    case MfFamily::dsig: return "dsig";
    case MfFamily::psig: return "psig";
    case MfFamily::tri: return "tri";
  }
  return "?";
}

MfFamily parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::parameter_domain, "unknown membership family '" + std::string(name) + "'");
}

std::size_t param_count(MfFamily family) noexcept {
  switch (family) {
    case MfFamily::gauss: return 2;
    case MfFamily::gbell:
    case MfFamily::tri: return 3;
    case MfFamily::gauss2:
    case MfFamily::dsig:
    case MfFamily::psig: return 4;
  }
  return 0;
}

double MfSpec::center() const {
  switch (family) {
    case MfFamily::gbell: return params.at(2);
    case MfFamily::gauss: return params.at(1);
    case MfFamily::tri: return params.at(1);
    case MfFamily::gauss2:
    case MfFamily::dsig:
    case MfFamily::psig: return 0.5 * (params.at(1) + params.at(3));
  }
  return 0.0;
}

void validate(const MfSpec &mf) {
  if (mf.params.size() != param_count(mf.family)) {
    domain_error(mf, "expected " + std::to_string(param_count(mf.family)) + " parameters, got " +
                         std::to_string(mf.params.size()));
  }
  if (!all_finite(mf.params)) domain_error(mf, "non-finite parameter");
  const auto &p = mf.params;
  switch (mf.family) {
    case MfFamily::gbell:
      if (!(p[0] > 0.0) || !(p[1] > 0.0)) domain_error(mf, "a and b must be positive");
      break;
    case MfFamily::gauss:
      if (!(p[0] > 0.0)) domain_error(mf, "sigma must be positive");
      break;
    case MfFamily::gauss2:
      if (!(p[0] > 0.0) || !(p[2] > 0.0)) domain_error(mf, "sigma1 and sigma2 must be positive");
      break;
    case MfFamily::tri:
      if (!(p[0] <= p[1] && p[1] <= p[2] && p[0] < p[2])) domain_error(mf, "vertices must satisfy a <= b <= c, a < c");
      break;
    case MfFamily::dsig:
    case MfFamily::psig: break;
  }
}

double eval_unchecked(const MfSpec &mf, double x) noexcept {
  const double raw = eval_raw(mf, x, nullptr);
  return std::clamp(raw, kMembershipFloor, 1.0);
}

double eval_grad_unchecked(const MfSpec &mf, double x, std::span<double> grad) noexcept {
  const double raw = eval_raw(mf, x, grad.data());
  if (raw < kMembershipFloor || raw > 1.0 || !std::isfinite(raw)) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return std::isfinite(raw) ? std::clamp(raw, kMembershipFloor, 1.0) : kMembershipFloor;
  }
  return raw;
}

double eval_mf(const MfSpec &mf, double x) {
  validate(mf);
  if (!std::isfinite(x)) throw Error(ErrorCode::parameter_domain, "membership input must be finite");
  return eval_unchecked(mf, x);
}

std::vector<double> grad_mf(const MfSpec &mf, double x) {
  validate(mf);
  if (!std::isfinite(x)) throw Error(ErrorCode::parameter_domain, "membership input must be finite");
  std::vector<double> grad(mf.params.size());
  eval_grad_unchecked(mf, x, grad);
  return grad;
}

void validate(const MfBank &bank) {
  if (!(bank.range.lo < bank.range.hi) || !std::isfinite(bank.range.lo) || !std::isfinite(bank.range.hi)) {
    throw Error(ErrorCode::invariant, "bank " + std::to_string(bank.input_index) + ": range must satisfy lo < hi");
  }
  if (bank.mfs.empty()) throw Error(ErrorCode::invariant, "bank " + std::to_string(bank.input_index) + " is empty");
  const double slack = 1e-9 * bank.range.width();
  for (const auto &mf : bank.mfs) {
    validate(mf);
    const double c = mf.center();
    if (c < bank.range.lo - slack || c > bank.range.hi + slack) {
      throw Error(ErrorCode::invariant,
                  "bank " + std::to_string(bank.input_index) + ": MF center " + std::to_string(c) + " outside range");
    }
  }
}

MfBank make_mf_bank(std::size_t input_index, Interval range, int count, MfFamily family) {
  if (count < 2) throw Error(ErrorCode::configuration, "membership count must be at least 2");
  if (!(range.lo < range.hi) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
    throw Error(ErrorCode::configuration, "membership range must satisfy lo < hi");
  }
  const double spacing = range.width() / (count - 1);
  // Gaussian whose half-maximum sits at distance `half` from its center.
  const auto sigma_for = [](double half) { return half / std::sqrt(2.0 * std::log(2.0)); };
  // Sigmoid slope reaching 0.9 a quarter spacing inside its 0.5 crossing.
  const double slope = std::log(9.0) / (spacing / 4.0);

  MfBank bank{input_index, range, {}};
  bank.mfs.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double c = j == count - 1 ? range.hi : range.lo + j * spacing;
    MfSpec mf{family, {}};
    switch (family) {
      case MfFamily::gbell: mf.params = {spacing / 2.0, 2.0, c}; break;
      case MfFamily::gauss: mf.params = {sigma_for(spacing / 2.0), c}; break;
      case MfFamily::gauss2: {
        const double s = sigma_for(spacing / 4.0);
        mf.params = {s, c - spacing / 4.0, s, c + spacing / 4.0};
        break;
      }
      case MfFamily::dsig: mf.params = {slope, c - spacing / 2.0, slope, c + spacing / 2.0}; break;
      case MfFamily::psig: mf.params = {slope, c - spacing / 2.0, -slope, c + spacing / 2.0}; break;
      case MfFamily::tri: mf.params = {c - spacing, c, c + spacing}; break;
    }
    bank.mfs.push_back(std::move(mf));
  }
  return bank;
}

void project_into_domain(MfSpec &mf, Interval range, double min_width) {
  auto &p = mf.params;
  switch (mf.family) {
    case MfFamily::gbell:
      p[0] = std::max(p[0], min_width);
      p[1] = std::max(p[1], min_width);
      break;
    case MfFamily::gauss: p[0] = std::max(p[0], min_width); break;
    case MfFamily::gauss2:
      p[0] = std::max(p[0], min_width);
      p[2] = std::max(p[2], min_width);
      break;
    case MfFamily::tri:
      std::sort(p.begin(), p.end());
      if (p[2] - p[0] < min_width) {
        p[0] = std::min(p[0], p[1] - min_width / 2.0);
        p[2] = std::max(p[2], p[1] + min_width / 2.0);
      }
      break;
    case MfFamily::dsig:
    case MfFamily::psig: break;
  }

  const double c = mf.center();
  const double shift = std::clamp(c, range.lo, range.hi) - c;
  if (shift != 0.0) {
    switch (mf.family) {
      case MfFamily::gbell: p[2] += shift; break;
      case MfFamily::gauss: p[1] += shift; break;
      case MfFamily::tri:
        for (auto &v : p) v += shift;
        break;
      case MfFamily::gauss2:
      case MfFamily::dsig:
      case MfFamily::psig:
        p[1] += shift;
        p[3] += shift;
        break;
    }
  }
}

}  // namespace anfis
