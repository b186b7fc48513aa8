#include "rawisp/sortnet.hpp"

#include <string>

namespace rawisp {

std::array<Bucket, kBucketCount> bucketize(std::span<const Anchor> anchors,
                                           std::uint64_t reference_length) {
  std::array<Bucket, kBucketCount> buckets;
  for (std::size_t r = 0; r < kBucketCount; ++r) buckets[r].region_index = r;
  if (anchors.empty()) return buckets;
  if (reference_length == 0) throw Error("bucketize: zero reference length");
  for (const Anchor& a : anchors) {
    if (a.ref_pos >= reference_length) {
      throw Error("bucketize: ref_pos " + std::to_string(a.ref_pos) + " outside reference");
    }
    const std::uint64_t r = static_cast<std::uint64_t>(a.ref_pos) * kBucketCount / reference_length;
    buckets[r].items.push_back(a);
  }
  return buckets;
}

namespace {

SortResult<Anchor> sort_bucket(const std::vector<Anchor>& items) {
  if (items.size() <= kSorterCapacity) {
    return bitonic_sort_block<Anchor>(items);
  }
  SortStats stats;
  std::vector<std::vector<Anchor>> runs;
  for (std::size_t start = 0; start < items.size(); start += kSorterCapacity) {
    const std::size_t len = std::min(kSorterCapacity, items.size() - start);
    auto block = bitonic_sort_block<Anchor>(std::span<const Anchor>(items).subspan(start, len));
    stats += block.stats;
    runs.push_back(std::move(block.items));
  }
  auto merged = stream_merge<Anchor>(runs);
  merged.stats.elements = 0;  // already counted by the blocks
  stats += merged.stats;
  return {std::move(merged.items), stats};
}

}  // namespace

SortAndMergeResult sort_and_merge(std::span<const Anchor> anchors, std::uint64_t reference_length) {
  auto buckets = bucketize(anchors, reference_length);
  std::array<std::vector<Anchor>, kBucketCount> sorted;
  SortAndMergeResult result;

  const bool worth_threads = anchors.size() > 4 * kSorterCapacity;
#pragma omp parallel for schedule(static) if (worth_threads)
  for (int b = 0; b < static_cast<int>(kBucketCount); ++b) {
    if (buckets[b].items.empty()) continue;
    auto r = sort_bucket(buckets[b].items);
    sorted[b] = std::move(r.items);
    result.bucket_stats[b] = r.stats;
  }

  result.sorted.reserve(anchors.size());
  for (const auto& s : sorted) result.sorted.insert(result.sorted.end(), s.begin(), s.end());
  return result;
}

}  // namespace rawisp
