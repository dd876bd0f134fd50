#include "gfvi/cdi.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "gfvi/coalescent.hpp"
#include "gfvi/errors.hpp"

namespace gfvi {

namespace {

// e^{-x} - 1 + x without cancellation for small x.
double exp_excess(double x) { return std::expm1(-x) + x; }

double immigration_slope(const CoagulationMeasure& measure) {
  double slope = measure.c0;
  for (const auto& a : measure.atoms) slope += a.weight * a.mass.s0;
  return slope;
}

// Bound on phi(q)/q when c1 = 0: q s - 1 + (1 - s)^q <= q s.
double linear_slope(const CoagulationMeasure& measure) {
  double slope = measure.c0;
  for (const auto& a : measure.atoms) {
    double mass = a.mass.s0;
    for (double s : a.mass.s) mass += s;
    slope += a.weight * mass;
  }
  return slope;
}

}  // namespace

double phi(const CoagulationMeasure& measure, double q) {
  double acc = measure.c0 * q + 0.5 * measure.c1 * q * (q - 1.0);
  for (const auto& a : measure.atoms) {
    double term = q * a.mass.s0;
    for (double s : a.mass.s) term += q * s - 1.0 + std::pow(1.0 - s, q);
    acc += a.weight * term;
  }
  return acc;
}

double zeta(const CoagulationMeasure& measure, double q) {
  double acc = 0.5 * measure.c1 * q * q;
  for (const auto& a : measure.atoms) {
    double term = 0.0;
    for (double s : a.mass.s) term += exp_excess(q * s);
    acc += a.weight * term;
  }
  return acc;
}

double psi(const CoagulationMeasure& measure, double q) { return zeta(measure, q) + immigration_slope(measure) * q; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges:
      return "converges";
    case Verdict::Diverges:
      return "diverges";
    case Verdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::Extinct:
      return "extinct";
    case Diagnosis::DoesNot:
      return "does-not";
    case Diagnosis::Inconclusive:
      break;
  }
  return "inconclusive";
}

namespace {

// int_from^inf dq / phi(q) through q = from / u, u in (0, 1].
std::optional<double> phi_tail_integral(const CoagulationMeasure& measure, double from) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(
      [&](double u) { return from / (u * u * phi(measure, from / u)); }, 0.0, 1.0, 15, 1e-13, &error);
  if (!std::isfinite(value) || error > 1e-9 * std::max(value, 1e-300)) return std::nullopt;
  return value;
}

}  // namespace

SeriesDiagnostic series_diagnostic(const CoagulationMeasure& measure, long truncation) {
  require_valid(measure);
  if (truncation < 2) throw PreconditionError("series_diagnostic: truncation must be >= 2");
  SeriesDiagnostic out;
  out.truncation = truncation;
  const auto N = static_cast<double>(truncation);

  if (!(phi(measure, 2.0) > 0.0)) {
    out.partial_sum = out.tail_lower = out.tail_upper = out.limit = INFINITY;
    out.verdict = out.tail_verdict = Verdict::Diverges;
    out.reason = "phi vanishes: no event moves the block count";
    return out;
  }
  double sum = 0.0;
  for (long n = truncation; n >= 2; --n) sum += 1.0 / phi(measure, static_cast<double>(n));

  if (measure.c1 > 0.0) {
    const auto upper = phi_tail_integral(measure, N);
    const auto lower = phi_tail_integral(measure, N + 1.0);
    if (upper && lower) {
      out.tail_upper = *upper;
      out.tail_lower = *lower;
      out.tail_verdict = Verdict::Converges;
    } else {
      out.tail_lower = 0.0;
      out.tail_upper = INFINITY;
      out.tail_verdict = Verdict::Inconclusive;
      out.reason = "tail quadrature did not reach its tolerance";
    }
  } else {
    // phi(q) <= B q, so the tail dominates a harmonic tail.
    out.tail_lower = out.tail_upper = INFINITY;
    out.tail_verdict = Verdict::Diverges;
    out.reason = fmt::format("c1 = 0: phi(q) <= {} q grows at most linearly", linear_slope(measure));
  }

  const double phi1 = phi(measure, 1.0);
  if (!(phi1 > 0.0)) {
    out.partial_sum = out.limit = INFINITY;
    out.verdict = Verdict::Diverges;
    out.reason = "phi(1) = 0: no immigration into the distinguished block";
    return out;
  }
  out.partial_sum = sum + 1.0 / phi1;
  out.verdict = out.tail_verdict;
  out.limit = out.partial_sum + 0.5 * (out.tail_lower + out.tail_upper);
  out.limit_halfwidth = 0.5 * (out.tail_upper - out.tail_lower);
  if (!std::isfinite(out.tail_upper)) {
    out.limit = INFINITY;
    out.limit_halfwidth = INFINITY;
  }
  return out;
}

IntegralDiagnostic integral_diagnostic(const CoagulationMeasure& measure, double a) {
  require_valid(measure);
  if (!(a > 0.0)) throw PreconditionError("integral_diagnostic: a must be > 0");
  IntegralDiagnostic out;
  out.lower = a;
  if (!(zeta(measure, a) > 0.0)) {
    out.verdict = Verdict::Diverges;
    out.estimate = INFINITY;
    out.reason = "condition ii fails (zeta degenerate)";
    return out;
  }
  using boost::math::quadrature::gauss_kronrod;
  auto segment = [&](double from, double to) {
    double error = 0.0;
    return gauss_kronrod<double, 61>::integrate(
        [&](double x) {
          const double q = std::exp(x);
          return q / zeta(measure, q);
        },
        std::log(from), std::log(to), 20, 1e-12, &error);
  };

  double previous_limit = a;
  double total = 0.0;
  auto extend = [&](double limit) {
    total += segment(previous_limit, limit);
    previous_limit = limit;
    out.limits.push_back(limit);
    out.integrals.push_back(total);
  };
  for (double limit : {1e2, 1e4, 1e6}) extend(std::max(limit, a * 10.0));

  for (;;) {
    const auto k = out.integrals.size();
    const double last = out.integrals[k - 1] - out.integrals[k - 2];
    const double before = out.integrals[k - 2] - out.integrals[k - 3];
    const double ratio = before > 0.0 ? last / before : 0.0;
    out.estimate = out.integrals.back();
    if (ratio <= 0.1) {
      out.verdict = Verdict::Converges;
      out.reason = fmt::format("increment ratio {:.3g}", ratio);
      return out;
    }
    if (ratio >= 0.5) {
      out.verdict = Verdict::Diverges;
      out.reason = fmt::format("increment ratio {:.3g}", ratio);
      return out;
    }
    if (out.limits.back() >= 1e12) {
      out.verdict = Verdict::Inconclusive;
      out.reason = fmt::format("increment ratio {:.3g} at Q = 1e12", ratio);
      return out;
    }
    extend(out.limits.back() * 100.0);
  }
}

CDIReport classify(const CoagulationMeasure& measure, long truncation) {
  require_valid(measure);
  CDIReport out;
  out.condition_i = measure.c0 > 0.0;
  bool any_atom = false;
  bool no_dust = false;
  for (const auto& a : measure.atoms) {
    if (!(a.weight > 0.0)) continue;
    any_atom = true;
    if (a.mass.s0 > 0.0) out.condition_i = true;
    double mass = 0.0;
    for (double s : a.mass.s) mass += s;
    out.regularity += a.weight * mass * mass;
    if (a.mass.dust() <= 1e-12) no_dust = true;
  }
  out.pfm_case = !any_atom ? "n/a" : (no_dust ? "finite-positive" : "zero");
  if (any_atom) out.notes.push_back("regularity is finite for atomic nu; atoms discretizing a heavy-tailed nu are not faithful");

  out.series = series_diagnostic(measure, truncation);
  if (out.series.verdict == Verdict::Converges) out.fixation_bound = out.series.limit;

  if (out.pfm_case == "finite-positive") {
    out.notes.push_back("atoms without dust: finitely many types remain after the first such event");
    out.diagnosis = out.condition_i ? Diagnosis::Extinct : Diagnosis::DoesNot;
    if (!out.condition_i) out.notes.push_back("condition i fails: no mass ever moves to type 0");
    return out;
  }

  out.integral = integral_diagnostic(measure);
  out.diagnostics_agree = out.series.tail_verdict == out.integral->verdict;
  if (!out.condition_i) {
    out.diagnosis = Diagnosis::DoesNot;
    out.notes.push_back("condition i fails: c0 = 0 and no atom has s0 > 0");
  } else if (out.integral->verdict == Verdict::Converges) {
    out.diagnosis = Diagnosis::Extinct;
  } else if (out.integral->verdict == Verdict::Diverges) {
    out.diagnosis = Diagnosis::DoesNot;
    out.notes.push_back("condition ii fails: " + out.integral->reason);
  } else {
    out.diagnosis = Diagnosis::Inconclusive;
  }
  return out;
}

std::pair<double, double> phi_oracle(const CoagulationMeasure& measure, int n, long samples, Rng& rng) {
  require_valid(measure);
  if (n < 1 || samples < 2) throw PreconditionError("phi_oracle: need n >= 1 and samples >= 2");
  const double nd = n;
  double estimate = measure.c0 * nd + measure.c1 * nd * (nd - 1.0) / 2.0;
  double variance = 0.0;
  std::vector<int> counts;
  for (const auto& atom : measure.atoms) {
    const auto& s = atom.mass;
    std::vector<double> cumulative{s.s0};
    for (double x : s.s) cumulative.push_back(cumulative.back() + x);
    std::vector<double> values(static_cast<std::size_t>(samples));
    for (auto& value : values) {
      counts.assign(cumulative.size(), 0);
      for (int k = 0; k < n; ++k) {
        const auto c = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), uniform01(rng)) - cumulative.begin());
        if (c < counts.size()) ++counts[c];
      }
      double decrease = counts[0];
      for (std::size_t l = 1; l < counts.size(); ++l) decrease += counts[l] - (counts[l] > 0 ? 1 : 0);
      value = decrease;
    }
    const auto [mean, se] = mean_and_se(values);
    estimate += atom.weight * mean;
    variance += atom.weight * atom.weight * se * se;
  }
  return {estimate, std::sqrt(variance)};
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw PreconditionError("log_grid: need 0 < lo < hi and 2+ points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  grid.back() = hi;
  return grid;
}

Sandwich sandwich(const CoagulationMeasure& measure, const std::vector<double>& grid) {
  Sandwich out;
  out.min_ratio = INFINITY;
  out.max_ratio = 0.0;
  for (double q : grid) {
    const double p = psi(measure, q);
    if (!(p > 0.0)) return out;
    const double r = phi(measure, q) / p;
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
  }
  out.finite = std::isfinite(out.max_ratio) && out.min_ratio > 0.0;
  return out;
}

double psi_over_q_curvature(const CoagulationMeasure& measure, const std::vector<double>& grid) {
  double worst = -INFINITY;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double x0 = grid[i - 1], x1 = grid[i], x2 = grid[i + 1];
    const double g0 = psi(measure, x0) / x0, g1 = psi(measure, x1) / x1, g2 = psi(measure, x2) / x2;
    const double second = 2.0 * ((g2 - g1) / (x2 - x1) - (g1 - g0) / (x1 - x0)) / (x2 - x0);
    worst = std::max(worst, second);
  }
  return worst;
}

AbsorptionSample absorption_sample(const CoagulationMeasure& measure, int n, long replicates, const RunOptions& run,
                                   double horizon, double horizon_cap) {
  if (!(horizon > 0.0) || horizon_cap < horizon) throw PreconditionError("absorption_sample: bad horizon");
  const EventSampler sampler(measure, n);
  AbsorptionSample out;
  for (;;) {
    const auto times = run_replicates<double>(static_cast<std::size_t>(replicates), run.threads, [&](std::size_t r) {
      auto rng = make_rng(run.seed, r);
      const auto t = sample_absorption_time(sampler, n, horizon, rng);
      return t ? *t : -1.0;
    });
    const auto censored = std::count(times.begin(), times.end(), -1.0);
    if (censored == 0 || horizon * 2.0 > horizon_cap) {
      std::vector<double> clipped(times);
      for (auto& t : clipped) {
        if (t < 0.0) t = horizon;
      }
      const auto [mean, se] = mean_and_se(clipped);
      out = {mean, se, horizon, static_cast<double>(censored) / static_cast<double>(replicates)};
      return out;
    }
    horizon *= 2.0;
  }
}

std::vector<ComparisonReport> fixation_bound_check(const CoagulationMeasure& measure, const std::vector<int>& ns,
                                                   long replicates, const RunOptions& run,
                                                   const AbsorptionOptions& options) {
  const auto series = series_diagnostic(measure, 10'000);
  if (series.verdict != Verdict::Converges) {
    throw PreconditionError("fixation_bound_check: bound undefined (series " + to_string(series.verdict) + ")");
  }
  std::vector<ComparisonReport> reports;
  for (int n : ns) {
    double bound = 0.0;
    for (int k = n; k >= 1; --k) bound += 1.0 / phi(measure, k);
    const double horizon = options.horizon > 0.0 ? options.horizon : 10.0 * bound;
    const double cap = options.horizon_cap > 0.0 ? options.horizon_cap : 1e4 * horizon;
    const auto sample = absorption_sample(measure, n, replicates, run, horizon, cap);
    ComparisonReport r;
    r.name = fmt::format("fixation n={}", n);
    r.estimate = sample.mean;
    r.se = sample.se;
    r.exact = bound;
    r.z = sample.se > 0.0 ? (sample.mean - bound) / sample.se : 0.0;
    r.pass = sample.censored_fraction == 0.0 && sample.mean <= bound + 3.0 * sample.se;
    r.notes.push_back(fmt::format("horizon {} censored fraction {}", sample.horizon, sample.censored_fraction));
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace gfvi
