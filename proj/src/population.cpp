#include "gfvi/population.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gfvi/errors.hpp"

namespace gfvi {

std::vector<std::string> law_problems(const InitialLaw& law) {
  if (law.kind != InitialLaw::Kind::Discrete) return {};
  auto out = measure_problems(law.atoms);
  for (double x : law.atoms.values) {
    if (!(x > 0.0 && x <= 1.0)) {
      out.push_back("initial atoms must lie in (0,1]; 0 is the immigrant type");
      break;
    }
  }
  return out;
}

TypeAssignment assign_types(int n, const InitialLaw& law, Rng& rng) {
  if (n < 0) throw PreconditionError("assign_types: n must be >= 0");
  if (const auto problems = law_problems(law); !problems.empty()) {
    throw PreconditionError("assign_types: " + problems.front());
  }
  TypeAssignment out;
  out.U.assign(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> cumulative;
  if (law.kind == InitialLaw::Kind::Discrete) {
    double acc = 0.0;
    for (double w : law.atoms.weights) cumulative.push_back(acc += w);
  }
  for (int k = 1; k <= n; ++k) {
    double& u = out.U[static_cast<std::size_t>(k)];
    switch (law.kind) {
      case InitialLaw::Kind::Uniform:
        u = 1.0 - uniform01(rng);
        break;
      case InitialLaw::Kind::DistinctLabels:
        u = static_cast<double>(k) / (n + 1.0);
        break;
      case InitialLaw::Kind::Discrete: {
        const double x = uniform01(rng) * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
        if (it == cumulative.end()) --it;
        u = law.atoms.values[static_cast<std::size_t>(it - cumulative.begin())];
        break;
      }
    }
  }
  return out;
}

std::vector<double> types_of(const DistinguishedPartition& pi, const TypeAssignment& types) {
  if (pi.bound() != types.n()) throw PreconditionError("types_of: partition and types differ in size");
  std::vector<double> v(static_cast<std::size_t>(pi.bound()));
  const auto a = pi.assignment();
  for (std::size_t k = 1; k < a.size(); ++k) v[k - 1] = types.U[static_cast<std::size_t>(a[k])];
  return v;
}

std::vector<double> types_at(const EventLog& log, const TypeAssignment& types, double t) {
  return types_of(forward_state(log, t), types);
}

DiscreteMeasure empirical_measure(std::span<const double> v) {
  if (v.empty()) throw PreconditionError("empirical_measure: no particles");
  std::map<double, std::size_t> counts;
  for (double x : v) ++counts[x];
  DiscreteMeasure mu;
  const double n = static_cast<double>(v.size());
  for (const auto& [x, c] : counts) {
    mu.values.push_back(x);
    mu.weights.push_back(static_cast<double>(c) / n);
  }
  return mu;
}

double empirical_moment(std::span<const double> v, const MomentFunctional& f) {
  return moment(empirical_measure(v), f);
}

double empirical_moment_mc(std::span<const double> v, const MomentFunctional& f, int samples, Rng& rng) {
  if (v.empty() || samples <= 0) throw PreconditionError("empirical_moment_mc: need particles and samples");
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::vector<double> x(static_cast<std::size_t>(f.arity()));
  double acc = 0.0;
  for (int r = 0; r < samples; ++r) {
    for (auto& xi : x) xi = v[pick(rng)];
    acc += f(x);
  }
  return acc / samples;
}

double empirical_phi(std::span<const double> v, const DistinguishedPartition& pi, const MomentFunctional& f) {
  return phi_functional(empirical_measure(v), pi, f);
}

CompositionCheck composition_ks(const MassPartition& s, int n, Rng& rng) {
  require_valid(s);
  if (n < 1) throw PreconditionError("composition_ks: n must be >= 1");
  const int m = s.size();
  std::vector<double> cumulative{s.s0};
  for (double x : s.s) cumulative.push_back(cumulative.back() + x);

  // Colors: 0 immigrant, 1..m paint-box colors, m + k dust.
  std::vector<int> color(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 1; k <= n; ++k) {
    const double x = uniform01(rng);
    const auto c = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
    color[static_cast<std::size_t>(k)] = c <= m ? c : m + k;
  }
  const auto pi = DistinguishedPartition::from_labels(color);

  TypeAssignment types;
  types.U.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) types.U[static_cast<std::size_t>(k)] = 1.0 - uniform01(rng);
  auto v = types_of(pi, types);
  std::sort(v.begin(), v.end());

  // Type carried by color j: U of its block, or a fresh draw if j is unseen.
  std::vector<double> color_type(static_cast<std::size_t>(m) + 1, -1.0);
  for (int k = 1; k <= n; ++k) {
    const int c = color[static_cast<std::size_t>(k)];
    if (c >= 1 && c <= m && color_type[static_cast<std::size_t>(c)] < 0.0) {
      color_type[static_cast<std::size_t>(c)] = types.U[static_cast<std::size_t>(pi.alpha(k))];
    }
  }
  for (int j = 1; j <= m; ++j) {
    if (color_type[static_cast<std::size_t>(j)] < 0.0) color_type[static_cast<std::size_t>(j)] = 1.0 - uniform01(rng);
  }

  const double dust = s.dust();
  auto predicted = [&](double x, bool left) {
    auto hit = [&](double atom) { return left ? atom < x : atom <= x; };
    double g = hit(0.0) ? s.s0 : 0.0;
    for (int j = 1; j <= m; ++j) {
      if (hit(color_type[static_cast<std::size_t>(j)])) g += s.s[static_cast<std::size_t>(j - 1)];
    }
    return g + dust * std::clamp(x, 0.0, 1.0);
  };
  auto empirical = [&](double x, bool left) {
    const auto it = left ? std::lower_bound(v.begin(), v.end(), x) : std::upper_bound(v.begin(), v.end(), x);
    return static_cast<double>(it - v.begin()) / n;
  };

  std::vector<double> points(v.begin(), v.end());
  points.push_back(0.0);
  points.push_back(1.0);
  points.insert(points.end(), color_type.begin() + 1, color_type.end());
  double ks = 0.0;
  for (double x : points) {
    ks = std::max(ks, std::abs(empirical(x, false) - predicted(x, false)));
    ks = std::max(ks, std::abs(empirical(x, true) - predicted(x, true)));
  }
  return {ks, pi.block_count()};
}

}  // namespace gfvi
