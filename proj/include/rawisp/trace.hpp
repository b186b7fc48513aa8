#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "rawisp/sortnet.hpp"

namespace rawisp {

enum class OpClass : std::uint8_t { add, compare, multiply, divide, lookup };
inline constexpr std::size_t kOpClassCount = 5;

// Pipeline steps in execution order. Quantisation (1b) runs before
// signal-to-event conversion (1a).
enum class Step : std::uint8_t {
  quantize,      // 1b
  event_detect,  // 1a
  hash,          // 2c
  freq_filter,   // 2d
  query,         // 2e
  vote,          // 2f
  bucketize,     // 3g
  sort,          // 3h
  chain,         // 3i
};
inline constexpr std::size_t kStepCount = 9;

std::string_view step_label(Step s);
std::optional<Step> step_from_label(std::string_view label);
std::string_view op_class_name(OpClass c);
std::optional<OpClass> op_class_from_name(std::string_view name);

struct StepTrace {
  std::array<std::uint64_t, kOpClassCount> ops{};
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  std::uint64_t work_items = 0;  // independent elements the step can spread over units

  void add(OpClass c, std::uint64_t n) { ops[static_cast<std::size_t>(c)] += n; }
  std::uint64_t count(OpClass c) const { return ops[static_cast<std::size_t>(c)]; }

  StepTrace& operator+=(const StepTrace& o);
  friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

// Operation counts and byte volumes of a mapping run, per step. Consumed by
// the in-storage cost model.
struct OperationTrace {
  std::array<StepTrace, kStepCount> steps{};
  std::array<SortStats, kBucketCount> sort_buckets{};
  std::uint64_t reads = 0;
  std::uint64_t index_bytes = 0;

  StepTrace& operator[](Step s) { return steps[static_cast<std::size_t>(s)]; }
  const StepTrace& operator[](Step s) const { return steps[static_cast<std::size_t>(s)]; }

  OperationTrace& operator+=(const OperationTrace& o);
  friend bool operator==(const OperationTrace&, const OperationTrace&) = default;

  // bytes_out of each step equals bytes_in of the next.
  bool conserves_bytes() const;
  bool empty() const;
};

// Rows of (step, op_class, count, bytes). Besides the op classes, each step
// carries io_in / io_out / work_items rows; sorter statistics use steps
// "3h/b0".."3h/b7"; run-level values use step "meta".
void write_trace(std::ostream& out, const OperationTrace& trace);
void write_trace(const std::string& path, const OperationTrace& trace);
OperationTrace read_trace(std::istream& in);
OperationTrace read_trace(const std::string& path);

}  // namespace rawisp
