#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anfis {

/// Parametric membership-function families. Parameter layouts:
///   gbell  [a, b, c]            1 / (1 + |(x - c) / a|^(2b))
///   gauss  [sigma, c]           exp(-(x - c)^2 / (2 sigma^2))
///   gauss2 [s1, c1, s2, c2]     left gauss branch below c1, right gauss branch above c2
///   dsig   [a1, c1, a2, c2]     sig(x; a1, c1) - sig(x; a2, c2)
///   psig   [a1, c1, a2, c2]     sig(x; a1, c1) * sig(x; a2, c2)
///   tri    [a, b, c]            piecewise-linear hat, peak at b
enum class MfFamily { gbell, gauss, gauss2, dsig, psig, tri };

inline constexpr std::array<MfFamily, 6> kAllFamilies = {MfFamily::gbell, MfFamily::gauss, MfFamily::gauss2,
                                                         MfFamily::dsig,  MfFamily::psig,  MfFamily::tri};

/// Lower clamp applied to every membership degree, so firing strengths stay
/// strictly positive.
inline constexpr double kMembershipFloor = 1e-12;

std::string_view to_string(MfFamily family) noexcept;

/// Throws Error(parameter_domain) for names outside the six families.
MfFamily parse_family(std::string_view name);

std::size_t param_count(MfFamily family) noexcept;

struct MfSpec {
  MfFamily family = MfFamily::gauss;
  std::vector<double> params;

  /// Location of the peak or plateau midpoint.
  double center() const;

  friend bool operator==(const MfSpec &, const MfSpec &) = default;
};

/// Throws Error(parameter_domain) if the parameter vector has the wrong length,
/// holds non-finite values or violates a width/ordering constraint.
void validate(const MfSpec &mf);

/// Degree of membership clamped to [kMembershipFloor, 1]. Unchecked; call
/// validate() on untrusted specs first.
double eval_unchecked(const MfSpec &mf, double x) noexcept;

/// Writes d(degree)/d(param_k) into `grad` (size param_count). Zero wherever
/// the clamp is active and at the kinks of tri. Returns the clamped degree.
double eval_grad_unchecked(const MfSpec &mf, double x, std::span<double> grad) noexcept;

double eval_mf(const MfSpec &mf, double x);
std::vector<double> grad_mf(const MfSpec &mf, double x);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }

  friend bool operator==(const Interval &, const Interval &) = default;
};

struct MfBank {
  std::size_t input_index = 0;
  Interval range;
  std::vector<MfSpec> mfs;

  friend bool operator==(const MfBank &, const MfBank &) = default;
};

void validate(const MfBank &bank);

/// Grid-partition initialisation: `count` MFs with centers evenly spaced over
/// `range` (both endpoints included), neighbours crossing near 0.5.
MfBank make_mf_bank(std::size_t input_index, Interval range, int count, MfFamily family);

/// Pulls a spec back into its valid domain after a gradient step: widths at
/// least min_width, tri vertices sorted, center inside `range`.
void project_into_domain(MfSpec &mf, Interval range, double min_width);

}  // namespace anfis
