#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace gfvi {

using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to (base, stream). Replicate r of an
/// experiment always draws from Rng(derive_seed(base, r)), so any replicate
/// can be re-run in isolation.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
  return Rng(derive_seed(base, stream));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double exponential(Rng& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

/// Runs body(r) for r in [0, count) on up to `threads` workers. Each call
/// writes only its own slot, so results come back in replicate order.
template <typename Result>
std::vector<Result> run_replicates(std::size_t count, unsigned threads,
                                   const std::function<Result(std::size_t)>& body);

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

template <typename Result>
std::vector<Result> run_replicates(std::size_t count, unsigned threads,
                                   const std::function<Result(std::size_t)>& body) {
  std::vector<Result> out(count);
  parallel_for(count, threads, [&](std::size_t r) { out[r] = body(r); });
  return out;
}

}  // namespace gfvi
