#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rawisp/anchor.hpp"
#include "rawisp/event_pipeline.hpp"
#include "rawisp/reference_index.hpp"
#include "rawisp/trace.hpp"

namespace rawisp {

struct Seed {
  std::uint32_t read_pos = 0;  // index of the first event of the window
  SeedHash hash = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

inline constexpr std::uint64_t kSeedBytes = 8;
inline constexpr std::uint64_t kMappingRecordBytes = 32;

struct FilterParams {
  std::uint32_t thresh_freq = 2000;
  std::uint32_t thresh_voting = 5;
  std::uint32_t voting_window = 256;  // bases

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

inline constexpr FilterParams kSmallGenomeFilters{2000, 5, 256};
inline constexpr FilterParams kLargeGenomeFilters{20000, 2, 256};
inline constexpr std::uint64_t kLargeGenomeThreshold = 50'000'000;
// Frequency filter keeps everything, every window with one vote survives.
inline constexpr FilterParams kFiltersDisabled{std::numeric_limits<std::uint32_t>::max(), 1, 256};

FilterParams filters_for_genome(std::uint64_t genome_size);

// One seed per window of n consecutive events (hash as in the reference index).
std::vector<Seed> generate_seeds(const EventSequence& events, std::size_t n_events_per_seed,
                                 StepTrace* trace = nullptr);

// Keeps a seed iff its reference frequency is <= thresh_freq. Seeds absent from
// the index are kept.
std::vector<Seed> frequency_filter(const ReferenceIndex& index, std::span<const Seed> seeds,
                                   std::uint32_t thresh_freq, StepTrace* trace = nullptr);

// One anchor per (seed, reference position) hit.
std::vector<Anchor> collect_anchors(const ReferenceIndex& index, std::span<const Seed> seeds,
                                    StepTrace* trace = nullptr);

// Windows of voting_window bases with stride voting_window/2 tile the
// reference. Each anchor votes in every window containing its ref_pos; votes
// in one window from the same read_pos count once. Windows below
// thresh_voting are dropped and an anchor survives iff one of its windows
// survives. Input order is preserved.
std::vector<Anchor> seed_and_vote(std::span<const Anchor> anchors, std::uint64_t reference_length,
                                  const FilterParams& params, StepTrace* trace = nullptr);

// Fixed-point chain scores carry 8 fractional bits.
inline constexpr int kScoreFractionalBits = 8;
inline constexpr std::int64_t kScoreOne = std::int64_t{1} << kScoreFractionalBits;

struct ChainParams {
  std::uint32_t max_gap = 500;
  std::uint32_t max_skip = 25;      // predecessors scanned per anchor
  std::uint32_t weight = 4;         // per anchor, normally n_events_per_seed
  std::int32_t events_to_bases = static_cast<std::int32_t>(kScoreOne);  // fixed point, 1.0
};

struct Chain {
  std::vector<Anchor> anchors;
  std::int64_t score = 0;  // fixed point
  std::uint32_t ref_start = 0;
  std::uint32_t ref_end = 0;

  double score_value() const { return static_cast<double>(score) / static_cast<double>(kScoreOne); }
};

// gap_cost(i, j) = |(ref_i - ref_j) - (read_i - read_j) * events_to_bases| in fixed point.
std::int64_t gap_cost(const Anchor& from, const Anchor& to, std::int32_t events_to_bases);

// Colinear chaining DP over anchors sorted by (ref_pos, read_pos):
//   f(i) = weight + max(0, max_j f(j) - gap_cost(i, j))
// over the max_skip nearest predecessors j with ref_j < ref_i, read_j < read_i
// and both gaps <= max_gap. Returns the best chain (ties: smaller ref_start,
// then more anchors); empty input gives an empty chain of score 0.
Chain chain(std::span<const Anchor> anchors, const ChainParams& params, StepTrace* trace = nullptr);

inline constexpr std::int64_t kDefaultMinScoreWeights = 8;

// events.merge_repeats is ignored by map_read, which folds reads iff the index
// was built from folded reference events.
struct MapParams {
  EventParams events{};
  FilterParams filters = kSmallGenomeFilters;
  ChainParams chaining{};
  std::int64_t min_score = 0;  // fixed point; 0 means kDefaultMinScoreWeights * weight
  // Translocation rate used to estimate bases per read event, which replaces
  // chaining.events_to_bases per read. 0 keeps chaining.events_to_bases.
  double samples_per_base = 10.0;
};

// Fixed-point bases per event for a read of `samples` samples split into
// `events` events; 1.0 when either count is 0.
std::int32_t estimate_events_to_bases(std::size_t samples, std::size_t events, double samples_per_base);

enum class MapStatus : std::uint8_t { mapped, unmapped };

struct MappingResult {
  std::string read_id;
  MapStatus status = MapStatus::unmapped;
  std::uint64_t ref_pos = 0;  // estimated read start on the reference
  std::int64_t score = 0;     // fixed point
  std::uint32_t read_events = 0;
  std::uint32_t n_anchors_considered = 0;  // anchors entering chaining
  std::uint32_t chain_anchors = 0;
  std::uint32_t ref_start = 0;
  std::uint32_t ref_end = 0;
  OperationTrace trace;
};

MappingResult map_read(const RawSignal& raw, const ReferenceIndex& index, const MapParams& params);

// Maps reads on up to `threads` OpenMP threads (0: runtime default); result
// order follows input order.
std::vector<MappingResult> map_reads(std::span<const RawSignal> reads, const ReferenceIndex& index,
                                     const MapParams& params, int threads = 0);
// Single-threaded reference for map_reads.
std::vector<MappingResult> map_reads_serial(std::span<const RawSignal> reads,
                                            const ReferenceIndex& index, const MapParams& params);

OperationTrace combine_traces(std::span<const MappingResult> results);

// PAF-like rows: read_id, read_len(events), status, ref_id, ref_start, ref_end,
// n_anchors, score. Unmapped rows use "*" for ref_id and 0 elsewhere.
struct MappingRecord {
  std::string read_id;
  std::uint32_t read_events = 0;
  MapStatus status = MapStatus::unmapped;
  std::string ref_id;
  std::uint64_t ref_start = 0;
  std::uint64_t ref_end = 0;
  std::uint32_t n_anchors = 0;
  double score = 0.0;
};

MappingRecord to_record(const MappingResult& r, const std::string& ref_id);
void write_mappings(std::ostream& out, std::span<const MappingRecord> records);
void write_mappings(const std::string& path, std::span<const MappingRecord> records);
std::vector<MappingRecord> read_mappings(std::istream& in);
std::vector<MappingRecord> read_mappings(const std::string& path);

}  // namespace rawisp
