#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rawisp/fixed_point.hpp"
#include "rawisp/signal_model.hpp"

namespace rawisp {

struct StepTrace;

// Uniform bucketing of normalised current z = (x - shift) / scale over
// [-4, +4] into 2^bucket_bits levels.
struct QuantizationParams {
  int bucket_bits = 4;
  double shift = 0.0;  // pA
  double scale = 1.0;  // pA

  static constexpr double kClamp = 4.0;

  std::uint32_t levels() const { return 1u << bucket_bits; }
  // Width of one bucket in normalised units.
  double bucket_width() const { return 2.0 * kClamp / static_cast<double>(levels()); }
  // Bucket centre in normalised units.
  double center(std::uint32_t level) const {
    return -kClamp + (static_cast<double>(level) + 0.5) * bucket_width();
  }
  std::uint16_t bucket(double z) const;
  double normalize(double picoamps) const { return (picoamps - shift) / scale; }
  double denormalize(double z) const { return shift + z * scale; }
  void validate() const;

  friend bool operator==(const QuantizationParams&, const QuantizationParams&) = default;
};

struct QuantizedSignal {
  std::vector<std::uint16_t> levels;
  QuantizationParams params;
};

inline constexpr std::size_t kMinSignalSamples = 32;

// Per-read median / 1.4826*MAD normalisation (population stddev if MAD is 0)
// followed by clamping and uniform bucketing of every sample.
QuantizedSignal normalize_and_quantize(std::span<const double> samples, int bucket_bits,
                                       StepTrace* trace = nullptr);

enum class Arithmetic : std::uint8_t { fixed, floating };

struct EventParams {
  std::size_t window = 6;
  double threshold_t = 4.0;
  std::size_t min_event_length = 3;
  FixedPointFormat format{};
  Arithmetic arithmetic = Arithmetic::fixed;
  // Fold neighbouring events that land in the same bucket (see merge_repeated_symbols).
  bool merge_repeats = true;
};

struct Event {
  std::int16_t mean_code = 0;  // fixed-point normalised mean
  std::uint16_t symbol = 0;    // quantisation bucket used for hashing
  std::uint32_t length = 0;    // samples
  std::uint32_t start_index = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSequence {
  std::string read_id;
  std::vector<Event> events;
  QuantizationParams params;
  FixedPointFormat format;
  bool merged_repeats = false;  // set by merge_repeated_symbols

  std::size_t size() const noexcept { return events.size(); }
  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

// Boundary positions (exclusive of 0 and n) where the Welch t-statistic between
// the `window` samples on either side peaks above `threshold_t`. Window
// variances are floored at `variance_floor`. Boundaries are at least
// `min_event_length` apart and from either end.
std::vector<std::size_t> segment_boundaries(std::span<const double> values, std::size_t window,
                                            double threshold_t, std::size_t min_event_length,
                                            double variance_floor);

// Segments a quantised stream. Event means are taken over bucket centres, in
// 16-bit fixed point or in double depending on params.arithmetic.
std::vector<Event> detect_events(const QuantizedSignal& signal, const EventParams& params,
                                 StepTrace* trace = nullptr);

// Hashing symbol for a fixed-point normalised value, integer arithmetic only.
std::uint16_t symbol_of_code(std::int16_t code, const QuantizationParams& q, FixedPointFormat fmt);

// Quantise first, then fixed-point, then segment.
EventSequence signal_to_events(const RawSignal& raw, int bucket_bits, const EventParams& params,
                               StepTrace* quantize_trace = nullptr,
                               StepTrace* detect_trace = nullptr);

// Conventional order: segment the normalised float signal, then quantise the
// event means. Kept for comparing the two orders.
EventSequence signal_to_events_detect_first(const RawSignal& raw, int bucket_bits,
                                            const EventParams& params);

// One length-1 event per k-mer, quantised with the pore model's global
// shift/scale under the same bucketing as reads.
EventSequence reference_to_events(const Sequence& seq, const PoreModel& model, int bucket_bits,
                                  FixedPointFormat format);

// Folds each run of adjacent events sharing a symbol into one event spanning
// the run. The merged mean is the length-weighted mean of the run, so the
// symbol is unchanged. Segmentation cannot see a boundary between two levels
// that quantise alike, so reads and the reference are both folded before
// seeding to keep their event streams comparable.
// Returns the number of events removed.
std::size_t merge_repeated_symbols(EventSequence& events);

// Debug dump: index, start, length, code, symbol.
void write_events_tsv(std::ostream& out, const EventSequence& events);

}  // namespace rawisp
