#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rawisp::testing {

inline constexpr std::size_t kMinPropertyCases = 1000;

struct PropertyOutcome {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool passed() const { return cases >= kMinPropertyCases && failures == 0; }
  void record(std::size_t case_index, bool ok, const std::string& what);
};

// Sample order is preserved by normalize_and_quantize and by the bucketing of
// arbitrary parameter sets; all levels stay within 2^bucket_bits.
PropertyOutcome quantization_monotonicity(std::uint64_t seed, std::size_t cases);

// |from_fixed(to_fixed(x)) - x| <= 2^-(f+1) for every representable x, and
// codes survive a decode/encode cycle.
PropertyOutcome fixed_point_round_trip(std::uint64_t seed, std::size_t cases);

// Events start at 0, abut, cover every sample exactly once and carry symbols
// consistent with their mean codes, in both arithmetics, folded or not.
PropertyOutcome event_partition_tiling(std::uint64_t seed, std::size_t cases);

// Frequency filter and seed-and-vote: output is an order-preserving subset of
// the input, a second pass changes nothing, and a looser threshold keeps a
// superset.
PropertyOutcome filter_laws(std::uint64_t seed, std::size_t cases);

// Every mapped read's trace hands each step's output volume to the next step,
// and so does the sum of traces.
PropertyOutcome trace_byte_conservation(std::uint64_t seed, std::size_t cases);

// The five suites above with the same case count.
std::vector<PropertyOutcome> invariant_suites(std::uint64_t seed, std::size_t cases);

// Cost-model laws on mapper-generated traces (index size scaled up to force
// several DRAM partitions): MARS <= MS-SmartSSD <= MARS-External latency,
// doubling DRAM never slower and at most 2x faster, energy linear in op counts.
PropertyOutcome simulator_laws(std::uint64_t seed, std::size_t cases);

}  // namespace rawisp::testing
