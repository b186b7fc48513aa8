#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rawisp/event_pipeline.hpp"

namespace rawisp {

using SeedHash = std::uint32_t;

// Hash of consecutive event symbols. Symbols are packed into a 64-bit word
// (packed = rotl(packed, bucket_bits) ^ symbol, which is a plain shift-or
// whenever n * bucket_bits <= 64), the word goes through the murmur3 64-bit
// finaliser
//   x ^= x >> 33; x *= 0xff51afd7ed558ccd; x ^= x >> 33;
//   x *= 0xc4ceb9fe1a85ec53; x ^= x >> 33
// and the low 32 bits are kept.
SeedHash seed_hash(std::span<const std::uint16_t> symbols, int bucket_bits);
SeedHash seed_hash(std::span<const Event> events, int bucket_bits);

inline constexpr std::size_t kMinSeedEvents = 2;
inline constexpr std::size_t kMaxSeedEvents = 16;

// Immutable hash -> ascending reference positions table, stored as sorted
// unique hashes with CSR offsets into one positions array.
class ReferenceIndex {
 public:
  ReferenceIndex() = default;

  std::size_t n_events_per_seed() const noexcept { return n_events_per_seed_; }
  std::uint64_t reference_length() const noexcept { return reference_length_; }
  const std::string& reference_name() const noexcept { return reference_name_; }
  const QuantizationParams& quant() const noexcept { return quant_; }
  FixedPointFormat format() const noexcept { return format_; }
  // Whether the reference events were folded with merge_repeated_symbols;
  // reads must be folded the same way.
  bool merged_repeats() const noexcept { return merged_repeats_; }

  std::size_t distinct_hashes() const noexcept { return hashes_.size(); }
  std::size_t total_positions() const noexcept { return positions_.size(); }
  const std::vector<SeedHash>& hashes() const noexcept { return hashes_; }

  // Positions for h, empty on a miss.
  std::span<const std::uint32_t> query(SeedHash h) const;
  // Occurrences of h in the reference (0 when absent).
  std::uint32_t frequency(SeedHash h) const;

  // Byte length of serialize().
  std::uint64_t size_bytes() const;

  std::vector<std::uint8_t> serialize() const;
  static ReferenceIndex deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::string& path) const;
  static ReferenceIndex load(const std::string& path);

  friend bool operator==(const ReferenceIndex&, const ReferenceIndex&) = default;

  friend ReferenceIndex build_index(const EventSequence& ref_events, std::size_t n_events_per_seed,
                                    std::uint64_t reference_length);

 private:
  std::size_t lookup(SeedHash h) const;

  std::size_t n_events_per_seed_ = 0;
  std::uint64_t reference_length_ = 0;
  bool merged_repeats_ = false;
  std::string reference_name_;
  QuantizationParams quant_;
  FixedPointFormat format_;
  std::vector<SeedHash> hashes_;
  std::vector<std::uint32_t> offsets_;  // size hashes_.size() + 1
  std::vector<std::uint32_t> positions_;
};

// One entry per window of n consecutive reference events, keyed by the
// window's first event start. A reference_length of 0 means "last event start + 1".
ReferenceIndex build_index(const EventSequence& ref_events, std::size_t n_events_per_seed,
                           std::uint64_t reference_length = 0);

struct IndexParams {
  int bucket_bits = 4;
  std::size_t n_events_per_seed = 6;
  FixedPointFormat format{};
  bool merge_repeats = true;
};

// reference_to_events, optional folding of repeated symbols, build_index.
ReferenceIndex index_reference(const Sequence& reference, const PoreModel& model,
                               const IndexParams& params = {});

}  // namespace rawisp
