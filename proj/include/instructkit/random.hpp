#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace instructkit {

/// splitmix64 generator. The whole pipeline draws from this so that outputs
/// are bit-identical across platforms and standard library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Unbiased draw from [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

/// splitmix64 output function applied to a single value.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Stream key for one randomized stage. Keys differ whenever any component
/// differs, so adding a dataset never perturbs another dataset's draws.
struct StreamKey {
  std::uint64_t seed = 0;
  std::string_view scope;  // dataset id, language tag, ...
  std::string_view stage;  // "split", "cap", "attach", "shuffle", ...
  std::uint64_t index = 0; // record ordinal or stratum hash

  std::uint64_t derive() const noexcept;
};

inline SplitMix64 make_rng(const StreamKey& key) { return SplitMix64(key.derive()); }

/// In-place Fisher-Yates, walking from the back.
template <typename T>
void fisher_yates(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
  fisher_yates(std::span<T>(items), rng);
}

/// Largest-remainder allocation of `seats` over parts with the given weights.
/// Quotas are seats * w_i / sum(w). Floors first, then leftover seats go to
/// the largest fractional remainders; equal remainders go to the lower index.
std::vector<std::size_t> apportion(std::size_t seats, std::span<const double> weights);

/// Exact integer variant: quotas are seats * counts_i / sum(counts).
std::vector<std::size_t> apportion_counts(std::size_t seats, std::span<const std::size_t> counts);

}  // namespace instructkit
