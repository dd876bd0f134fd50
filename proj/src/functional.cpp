#include "gfvi/functional.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "gfvi/errors.hpp"

namespace gfvi {

std::vector<std::string> measure_problems(const DiscreteMeasure& mu) {
  std::vector<std::string> out;
  if (mu.values.size() != mu.weights.size()) out.push_back("values and weights differ in length");
  if (mu.values.empty()) out.push_back("measure has no atoms");
  for (double x : mu.values) {
    if (!(x >= 0.0 && x <= 1.0)) {
      out.push_back("atoms must lie in [0,1]");
      break;
    }
  }
  for (double w : mu.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      out.push_back("weights must be finite and >= 0");
      break;
    }
  }
  const double total = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) out.push_back("weights must sum to 1");
  return out;
}

double Factor::operator()(double x) const {
  if (kind == Kind::Indicator) {
    for (double v : values) {
      if (std::abs(x - v) <= 1e-12) return 1.0;
    }
    return 0.0;
  }
  double acc = 0.0;
  for (auto it = values.rbegin(); it != values.rend(); ++it) acc = acc * x + *it;
  return acc;
}

MomentFunctional MomentFunctional::identity_power(int p) {
  return MomentFunctional(std::vector<Factor>(static_cast<std::size_t>(p), Factor::polynomial({0.0, 1.0})));
}

MomentFunctional MomentFunctional::constant_one(int p) {
  return MomentFunctional(std::vector<Factor>(static_cast<std::size_t>(p), Factor::polynomial({1.0})));
}

MomentFunctional MomentFunctional::parse(std::string_view text) {
  std::vector<Factor> factors;
  std::size_t i = 0;
  auto fail = [&] { throw PreconditionError("malformed moment functional '" + std::string(text) + "'"); };
  auto skip_ws = [&] {
    while (i < text.size() && text[i] == ' ') ++i;
  };
  for (;;) {
    skip_ws();
    Factor::Kind kind;
    if (text.substr(i, 5) == "poly(") {
      kind = Factor::Kind::Polynomial;
      i += 5;
    } else if (text.substr(i, 4) == "ind(") {
      kind = Factor::Kind::Indicator;
      i += 4;
    } else {
      fail();
    }
    std::vector<double> values;
    for (;;) {
      skip_ws();
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
      if (ec != std::errc()) fail();
      i = static_cast<std::size_t>(ptr - text.data());
      values.push_back(v);
      skip_ws();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i >= text.size() || text[i] != ')') fail();
    ++i;
    factors.push_back({kind, std::move(values)});
    skip_ws();
    if (i == text.size()) break;
    if (text[i] != '*') fail();
    ++i;
  }
  return MomentFunctional(std::move(factors));
}

double MomentFunctional::operator()(std::span<const double> x) const {
  if (x.size() != factors_.size()) throw PreconditionError("moment functional: wrong arity");
  double acc = 1.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) acc *= factors_[i](x[i]);
  return acc;
}

std::string MomentFunctional::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) out += '*';
    out += factors_[i].kind == Factor::Kind::Polynomial ? "poly(" : "ind(";
    for (std::size_t k = 0; k < factors_[i].values.size(); ++k) {
      if (k) out += ',';
      out += fmt::format("{}", factors_[i].values[k]);
    }
    out += ')';
  }
  return out;
}

double phi_functional(const DiscreteMeasure& mu, const DistinguishedPartition& pi, const MomentFunctional& f) {
  if (pi.bound() != f.arity()) throw PreconditionError("phi_functional: partition must live on [arity]");
  const auto blocks = pi.blocks();
  double acc = 1.0;
  for (int i : blocks[0]) {
    if (i > 0) acc *= f.factor(i - 1)(0.0);
  }
  for (std::size_t b = 1; b < blocks.size() && acc != 0.0; ++b) {
    double integral = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) {
      double term = mu.weights[a];
      for (int i : blocks[b]) term *= f.factor(i - 1)(mu.values[a]);
      integral += term;
    }
    acc *= integral;
  }
  return acc;
}

double moment(const DiscreteMeasure& mu, const MomentFunctional& f) {
  return phi_functional(mu, singletons(f.arity()), f);
}

}  // namespace gfvi
