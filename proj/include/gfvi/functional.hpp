#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gfvi/partition.hpp"

namespace gfvi {

/// Finitely supported probability measure on [0,1].
struct DiscreteMeasure {
  std::vector<double> values;
  std::vector<double> weights;

  static DiscreteMeasure dirac(double x) { return {{x}, {1.0}}; }
  std::size_t size() const { return values.size(); }
  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;
};

/// Empty when `mu` is a probability measure on [0,1] (sum of weights 1
/// within 1e-12, weights >= 0, matching lengths).
std::vector<std::string> measure_problems(const DiscreteMeasure& mu);

/// A univariate factor: polynomial sum_k c_k x^k, or the indicator of a finite
/// set of points (matched within 1e-12).
struct Factor {
  enum class Kind { Polynomial, Indicator };
  Kind kind = Kind::Polynomial;
  std::vector<double> values;  // coefficients or indicator points

  static Factor polynomial(std::vector<double> coefficients) { return {Kind::Polynomial, std::move(coefficients)}; }
  static Factor indicator(std::vector<double> points) { return {Kind::Indicator, std::move(points)}; }

  double operator()(double x) const;
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// f(x_1,...,x_p) = g_1(x_1) ... g_p(x_p). Written as `poly(0,1)*ind(0.5)`.
class MomentFunctional {
 public:
  MomentFunctional() = default;
  explicit MomentFunctional(std::vector<Factor> factors) : factors_(std::move(factors)) {}

  /// f = x_1 x_2 ... x_p.
  static MomentFunctional identity_power(int p);
  /// f = 1 with arity p.
  static MomentFunctional constant_one(int p);
  static MomentFunctional parse(std::string_view text);

  int arity() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }
  double operator()(std::span<const double> x) const;
  std::string to_string() const;

  friend bool operator==(const MomentFunctional&, const MomentFunctional&) = default;

 private:
  std::vector<Factor> factors_;
};

/// Phi_f(mu, pi) = int delta_0(dx_0) mu(dx_1)...mu(dx_p) f(x_alpha(1),...,x_alpha(p))
/// for pi on [p], computed block by block from the product structure of f.
double phi_functional(const DiscreteMeasure& mu, const DistinguishedPartition& pi, const MomentFunctional& f);

/// G_f(mu) = Phi_f(mu, 0_[p]).
double moment(const DiscreteMeasure& mu, const MomentFunctional& f);

}  // namespace gfvi
