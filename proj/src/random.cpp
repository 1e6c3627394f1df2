#include "instructkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace instructkit {

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t StreamKey::derive() const noexcept {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ fnv1a64(scope));
  h = mix64(h ^ fnv1a64(stage));
  h = mix64(h ^ (index + 0x632BE59BD9B4E019ULL));
  return h;
}

namespace {

struct Seat {
  std::size_t index;
  double remainder;
};

std::vector<std::size_t> distribute(std::size_t seats, std::vector<std::size_t> counts,
                                    std::vector<Seat> remainders) {
  std::size_t assigned = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const Seat& a, const Seat& b) { return a.remainder > b.remainder; });
  for (std::size_t k = 0; assigned < seats && k < remainders.size(); ++k, ++assigned) {
    ++counts[remainders[k].index];
  }
  return counts;
}

}  // namespace

std::vector<std::size_t> apportion(std::size_t seats, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty() || seats == 0 || total <= 0.0) return counts;

  std::vector<Seat> remainders;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double quota = static_cast<double>(seats) * weights[i] / total;
    const double nearest = std::round(quota);
    if (std::abs(quota - nearest) < 1e-9) quota = nearest;
    const double floor = std::floor(quota);
    counts[i] = static_cast<std::size_t>(floor);
    double rem = quota - floor;
    rem = std::round(rem * 1e9) / 1e9;
    if (weights[i] > 0.0) remainders.push_back({i, rem});
  }
  return distribute(seats, std::move(counts), std::move(remainders));
}

std::vector<std::size_t> apportion_counts(std::size_t seats, std::span<const std::size_t> counts_in) {
  const std::size_t total = std::accumulate(counts_in.begin(), counts_in.end(), std::size_t{0});
  std::vector<std::size_t> counts(counts_in.size(), 0);
  if (counts_in.empty() || seats == 0 || total == 0) return counts;

  std::vector<Seat> remainders;
  for (std::size_t i = 0; i < counts_in.size(); ++i) {
    const unsigned __int128 scaled = static_cast<unsigned __int128>(seats) * counts_in[i];
    counts[i] = static_cast<std::size_t>(scaled / total);
    const auto rem = static_cast<std::size_t>(scaled % total);
    if (counts_in[i] > 0) remainders.push_back({i, static_cast<double>(rem)});
  }
  return distribute(seats, std::move(counts), std::move(remainders));
}

}  // namespace instructkit
