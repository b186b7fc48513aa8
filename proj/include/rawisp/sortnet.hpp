#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "rawisp/anchor.hpp"
#include "rawisp/error.hpp"

namespace rawisp {

// Work done by the sorter/merger hardware model.
struct SortStats {
  std::uint64_t comparators_fired = 0;      // comparators between two real elements
  std::uint64_t sentinel_comparators = 0;   // comparators touching padding
  std::uint64_t network_stages = 0;         // comparator columns traversed
  std::uint64_t merge_steps = 0;            // elements emitted by the merger
  std::uint64_t elements = 0;
  std::uint64_t blocks = 0;                 // sorter invocations
  std::uint64_t merges = 0;                 // merger invocations

  std::uint64_t total_comparators() const { return comparators_fired + sentinel_comparators; }

  SortStats& operator+=(const SortStats& o) {
    comparators_fired += o.comparators_fired;
    sentinel_comparators += o.sentinel_comparators;
    network_stages += o.network_stages;
    merge_steps += o.merge_steps;
    elements += o.elements;
    blocks += o.blocks;
    merges += o.merges;
    return *this;
  }
  friend bool operator==(const SortStats&, const SortStats&) = default;
};

inline constexpr std::size_t kSorterCapacity = 128;
inline constexpr std::size_t kBucketCount = 8;

// Stages of a bitonic network over n = 2^p inputs: p(p+1)/2.
constexpr std::uint64_t bitonic_stages(std::uint64_t n) {
  if (n < 2) return 0;
  const auto p = static_cast<std::uint64_t>(std::bit_width(n) - 1);
  return p * (p + 1) / 2;
}

// Comparators of the same network: n/2 per stage.
constexpr std::uint64_t bitonic_comparators(std::uint64_t n) { return n / 2 * bitonic_stages(n); }

template <class T>
struct SortResult {
  std::vector<T> items;
  SortStats stats;
};

// Canonical bitonic sorting network over at most 128 items. The input is
// padded to the next power of two with +infinity sentinels, which are
// stripped from the output.
template <class T, class Less = std::less<T>>
SortResult<T> bitonic_sort_block(std::span<const T> input, Less less = {}) {
  if (input.size() > kSorterCapacity) {
    throw Error("bitonic_sort_block: block of " + std::to_string(input.size()) +
                " exceeds sorter capacity " + std::to_string(kSorterCapacity));
  }
  SortResult<T> out;
  out.stats.elements = input.size();
  out.stats.blocks = 1;
  if (input.empty()) return out;

  const std::size_t n = std::bit_ceil(input.size());
  struct Slot {
    T value;
    bool sentinel;
  };
  std::vector<Slot> net;
  net.reserve(n);
  for (const T& v : input) net.push_back({v, false});
  while (net.size() < n) net.push_back({input.front(), true});

  // Sentinels compare greater than everything, including each other by equality.
  auto greater = [&](const Slot& a, const Slot& b) {
    if (a.sentinel) return !b.sentinel;
    if (b.sentinel) return false;
    return less(b.value, a.value);
  };

  for (std::size_t k = 2; k <= n; k <<= 1) {
    for (std::size_t j = k >> 1; j > 0; j >>= 1) {
      ++out.stats.network_stages;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = i ^ j;
        if (l <= i) continue;
        Slot& lo = net[i];
        Slot& hi = net[l];
        if (lo.sentinel || hi.sentinel) {
          ++out.stats.sentinel_comparators;
        } else {
          ++out.stats.comparators_fired;
        }
        const bool ascending = (i & k) == 0;
        if (ascending ? greater(lo, hi) : greater(hi, lo)) std::swap(lo, hi);
      }
    }
  }

  out.items.reserve(input.size());
  for (const Slot& s : net) {
    if (!s.sentinel) out.items.push_back(s.value);
  }
  return out;
}

// One-pass k-way merge of individually sorted runs. Equal keys are emitted in
// run order.
template <class T, class Less = std::less<T>>
SortResult<T> stream_merge(std::span<const std::vector<T>> runs, Less less = {}) {
  SortResult<T> out;
  std::size_t total = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    for (std::size_t i = 1; i < run.size(); ++i) {
      if (less(run[i], run[i - 1])) {
        throw Error("stream_merge: run " + std::to_string(r) + " is not sorted at index " +
                    std::to_string(i));
      }
    }
    total += run.size();
  }
  out.items.reserve(total);
  out.stats.elements = total;
  out.stats.merges = 1;

  using Head = std::pair<std::size_t, std::size_t>;  // run, offset
  auto after = [&](const Head& a, const Head& b) {
    const T& x = runs[a.first][a.second];
    const T& y = runs[b.first][b.second];
    if (less(y, x)) return true;
    if (less(x, y)) return false;
    return a.first > b.first;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(after)> heads(after);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].empty()) heads.push({r, 0});
  }
  while (!heads.empty()) {
    const auto [r, i] = heads.top();
    heads.pop();
    out.items.push_back(runs[r][i]);
    ++out.stats.merge_steps;
    if (i + 1 < runs[r].size()) heads.push({r, i + 1});
  }
  return out;
}

struct Bucket {
  std::size_t region_index = 0;
  std::vector<Anchor> items;
};

// Region r covers reference offsets [r*L/8, (r+1)*L/8); input order is kept
// within each bucket.
std::array<Bucket, kBucketCount> bucketize(std::span<const Anchor> anchors,
                                           std::uint64_t reference_length);

struct SortAndMergeResult {
  std::vector<Anchor> sorted;
  std::array<SortStats, kBucketCount> bucket_stats{};

  SortStats total() const {
    SortStats s;
    for (const auto& b : bucket_stats) s += b;
    return s;
  }
};

// bucketize -> per-bucket 128-element block sorts -> per-bucket stream merge
// (only when a bucket spans several blocks) -> concatenation in region order.
// Buckets are processed in parallel when OpenMP is available.
SortAndMergeResult sort_and_merge(std::span<const Anchor> anchors, std::uint64_t reference_length);

}  // namespace rawisp
