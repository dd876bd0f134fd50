#include "gfvi/exact.hpp"

#include <algorithm>
#include <functional>

namespace gfvi {

PartitionSpace::PartitionSpace(int p, int max_resolution) : p_(p) {
  if (p < 0) throw PreconditionError("enumerate: p must be >= 0");
  if (p > max_resolution || p > 15) {
    throw ResourceError("enumerate: resolution " + std::to_string(p) + " exceeds the cap of " +
                        std::to_string(std::min(max_resolution, 15)));
  }
  // Restricted growth strings a[0] = 0, a[k] <= 1 + max(a[0..k-1]).
  std::vector<int> labels(static_cast<std::size_t>(p) + 1, 0);
  std::function<void(int, int)> extend = [&](int k, int top) {
    if (k > p) {
      partitions_.push_back(DistinguishedPartition::from_labels(labels));
      return;
    }
    for (int label = 0; label <= top + 1; ++label) {
      labels[static_cast<std::size_t>(k)] = label;
      extend(k + 1, std::max(top, label));
    }
  };
  extend(1, 0);
  for (std::size_t i = 0; i < partitions_.size(); ++i) index_.emplace(key(partitions_[i]), i);
}

std::uint64_t PartitionSpace::key(const DistinguishedPartition& pi) {
  std::uint64_t k = 0;
  for (int a : pi.assignment()) k = (k << 4) | static_cast<std::uint64_t>(a);
  return k;
}

std::size_t PartitionSpace::index_of(const DistinguishedPartition& pi) const {
  if (pi.bound() != p_) throw PreconditionError("PartitionSpace: partition on the wrong ground set");
  return index_.at(key(pi));
}

PartitionSpace enumerate(int p, int max_resolution) { return PartitionSpace(p, max_resolution); }

RateMatrix rate_matrix(const CoagulationMeasure& measure, const PartitionSpace& space) {
  require_valid(measure);
  struct Jump {
    const DistinguishedPartition* event;
    double rate;
  };
  std::vector<Jump> jumps;
  for (const auto& pi : space) {
    if (pi.is_singletons()) continue;
    const double q = jump_rate(measure, pi);
    if (q > 0.0) jumps.push_back({&pi, q});
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  RateMatrix Q = RateMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& from = space[static_cast<std::size_t>(i)];
    for (const auto& jump : jumps) {
      const auto to = coag(from, *jump.event);
      if (to == from) continue;
      Q(i, static_cast<Eigen::Index>(space.index_of(to))) += jump.rate;
    }
    Q(i, i) = -Q.row(i).sum();
  }
  return Q;
}

Eigen::VectorXd phi_vector(const PartitionSpace& space, const DiscreteMeasure& rho, const MomentFunctional& f) {
  Eigen::VectorXd phi(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i) phi(static_cast<Eigen::Index>(i)) = phi_functional(rho, space[i], f);
  return phi;
}

double exact_dual_expectation(const CoagulationMeasure& measure, const DistinguishedPartition& start,
                              const DiscreteMeasure& rho, const MomentFunctional& f, double t,
                              double tolerance) {
  if (start.bound() != f.arity()) throw PreconditionError("exact_dual_expectation: start must live on [arity]");
  const PartitionSpace space(f.arity());
  const auto phi = phi_vector(space, rho, f);
  if (t == 0.0) return phi(static_cast<Eigen::Index>(space.index_of(start)));
  const auto Q = rate_matrix(measure, space);
  const Eigen::VectorXd evolved = semigroup_apply(Q, t, phi, tolerance);
  return evolved(static_cast<Eigen::Index>(space.index_of(start)));
}

double generator_direct(const CoagulationMeasure& measure, const DiscreteMeasure& rho, const MomentFunctional& f) {
  require_valid(measure);
  const PartitionSpace space(f.arity());
  const double base = moment(rho, f);
  double acc = 0.0;
  for (const auto& pi : space) {
    if (pi.is_singletons()) continue;
    acc += jump_rate(measure, pi) * (phi_functional(rho, pi, f) - base);
  }
  return acc;
}

namespace {

// Calls body(indices) for every tuple in {0..base-1}^length.
template <typename Body>
void for_each_tuple(int length, std::size_t base, Body&& body) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(length), 0);
  if (base == 0 && length > 0) return;
  for (;;) {
    body(idx);
    int pos = 0;
    while (pos < length) {
      auto& d = idx[static_cast<std::size_t>(pos)];
      if (++d < base) break;
      d = 0;
      ++pos;
    }
    if (pos == length) return;
  }
}

// int f d rho^{(x) p}, plus the same integral with the coordinate map
// `modify` applied to x first.
double integrate(const DiscreteMeasure& rho, const MomentFunctional& f,
                 const std::function<void(std::vector<double>&)>& modify) {
  const int p = f.arity();
  std::vector<double> x(static_cast<std::size_t>(p));
  double acc = 0.0;
  for_each_tuple(p, rho.size(), [&](const std::vector<std::size_t>& idx) {
    double w = 1.0;
    for (int i = 0; i < p; ++i) {
      w *= rho.weights[idx[static_cast<std::size_t>(i)]];
      x[static_cast<std::size_t>(i)] = rho.values[idx[static_cast<std::size_t>(i)]];
    }
    if (w == 0.0) return;
    const double before = f(x);
    modify(x);
    acc += w * (f(x) - before);
  });
  return acc;
}

// E[G_f(dust rho + s0 delta_0 + sum_i s_i delta_{U_i})] with U_i iid rho.
double expected_moment_after_reproduction(const MassPartition& s, const DiscreteMeasure& rho,
                                          const MomentFunctional& f) {
  const int p = f.arity();
  const int m = s.size();
  // component 0: background rho; 1: immigrant type 0; 2 + j: U_{j+1}.
  std::vector<double> comp_weight{s.dust(), s.s0};
  comp_weight.insert(comp_weight.end(), s.s.begin(), s.s.end());

  double total = 0.0;
  std::vector<double> y(static_cast<std::size_t>(p));
  for_each_tuple(p, static_cast<std::size_t>(m) + 2, [&](const std::vector<std::size_t>& comp) {
    double w = 1.0;
    for (auto c : comp) w *= comp_weight[c];
    if (w == 0.0) return;
    // One free variable per background coordinate and per distinct color used.
    std::vector<int> var_of(static_cast<std::size_t>(p), -1);
    std::vector<int> color_var(static_cast<std::size_t>(m), -1);
    int vars = 0;
    for (int i = 0; i < p; ++i) {
      const auto c = comp[static_cast<std::size_t>(i)];
      if (c == 0) {
        var_of[static_cast<std::size_t>(i)] = vars++;
      } else if (c >= 2) {
        int& cv = color_var[c - 2];
        if (cv < 0) cv = vars++;
        var_of[static_cast<std::size_t>(i)] = cv;
      }
    }
    double inner = 0.0;
    for_each_tuple(vars, rho.size(), [&](const std::vector<std::size_t>& atom) {
      double v = 1.0;
      for (auto a : atom) v *= rho.weights[a];
      if (v == 0.0) return;
      for (int i = 0; i < p; ++i) {
        const int var = var_of[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(i)] = var < 0 ? 0.0 : rho.values[atom[static_cast<std::size_t>(var)]];
      }
      inner += v * f(y);
    });
    total += w * inner;
  });
  return total;
}

}  // namespace

double generator_decomposed(const CoagulationMeasure& measure, const DiscreteMeasure& rho,
                            const MomentFunctional& f, double cap) {
  require_valid(measure);
  const int p = f.arity();
  const auto atoms_rho = static_cast<double>(rho.size());
  std::size_t widest = 0;
  for (const auto& atom : measure.atoms) widest = std::max(widest, atom.mass.s.size());
  const double work = std::pow(atoms_rho, p) * std::pow(static_cast<double>(widest) + 2.0, p);
  if (work > cap) throw ResourceError("generator_decomposed: enumeration exceeds the resource cap");

  double acc = 0.0;
  if (measure.c0 != 0.0) {
    for (int i = 0; i < p; ++i) {
      acc += measure.c0 * integrate(rho, f, [i](std::vector<double>& x) { x[static_cast<std::size_t>(i)] = 0.0; });
    }
  }
  if (measure.c1 != 0.0) {
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        acc += measure.c1 * integrate(rho, f, [i, j](std::vector<double>& x) {
          x[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(i)];
        });
      }
    }
  }
  if (!measure.atoms.empty()) {
    double g_rho = 0.0;
    {
      std::vector<double> x(static_cast<std::size_t>(p));
      for_each_tuple(p, rho.size(), [&](const std::vector<std::size_t>& idx) {
        double w = 1.0;
        for (int i = 0; i < p; ++i) {
          w *= rho.weights[idx[static_cast<std::size_t>(i)]];
          x[static_cast<std::size_t>(i)] = rho.values[idx[static_cast<std::size_t>(i)]];
        }
        g_rho += w * f(x);
      });
    }
    for (const auto& atom : measure.atoms) {
      acc += atom.weight * (expected_moment_after_reproduction(atom.mass, rho, f) - g_rho);
    }
  }
  return acc;
}

}  // namespace gfvi
