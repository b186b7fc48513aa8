#include "rawisp/event_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rawisp/error.hpp"
#include "rawisp/stats.hpp"
#include "rawisp/trace.hpp"

namespace rawisp {

namespace {

std::uint64_t value_bytes(Arithmetic a) { return a == Arithmetic::fixed ? 2 : 4; }

constexpr std::uint64_t kRawSampleBytes = 4;  // float32 picoamperes

// Quantisation noise variance of a uniformly rounded value, in bucket units.
constexpr double kQuantisationVariance = 1.0 / 12.0;

}  // namespace

std::uint16_t QuantizationParams::bucket(double z) const {
  const double clamped = std::clamp(z, -kClamp, kClamp);
  const auto level = static_cast<std::int64_t>(std::floor((clamped + kClamp) / bucket_width()));
  return static_cast<std::uint16_t>(std::min<std::int64_t>(level, levels() - 1));
}

void QuantizationParams::validate() const {
  if (bucket_bits < 2 || bucket_bits > 10) throw Error("bucket_bits must be in [2, 10]");
  if (!(scale > 0.0)) throw Error("quantization scale must be positive");
}

QuantizedSignal normalize_and_quantize(std::span<const double> samples, int bucket_bits,
                                       StepTrace* trace) {
  if (samples.size() < kMinSignalSamples) {
    throw Error("signal too short: " + std::to_string(samples.size()) + " samples, need " +
                std::to_string(kMinSignalSamples));
  }
  QuantizedSignal out;
  out.params.bucket_bits = bucket_bits;
  out.params.shift = median(samples);
  double scale = kMadToSigma * median_absolute_deviation(samples, out.params.shift);
  if (!(scale > 0.0)) scale = population_stddev(samples);
  if (!(scale > 0.0)) throw Error("zero dispersion: signal is constant");
  out.params.scale = scale;
  out.params.validate();

  out.levels.reserve(samples.size());
  for (double x : samples) out.levels.push_back(out.params.bucket(out.params.normalize(x)));

  if (trace) {
    const std::uint64_t n = samples.size();
    // two selections (median, MAD) plus per-sample subtract, scale, clamp, bucket
    trace->add(OpClass::compare, 4 * n + 2 * n);
    trace->add(OpClass::add, n + 2 * n);
    trace->add(OpClass::multiply, 2 * n);
    trace->add(OpClass::divide, 1);
    trace->bytes_in += n * kRawSampleBytes;
    trace->work_items += n;
  }
  return out;
}

std::vector<std::size_t> segment_boundaries(std::span<const double> values, std::size_t window,
                                            double threshold_t, std::size_t min_event_length,
                                            double variance_floor) {
  if (window < 3) throw Error("event detection window must be >= 3");
  const std::size_t n = values.size();
  if (n < 2 * window) {
    throw Error("stream too short for event detection: " + std::to_string(n) + " < 2*window");
  }
  std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + values[i];
    sq[i + 1] = sq[i] + values[i] * values[i];
  }
  const auto w = static_cast<double>(window);
  auto moments = [&](std::size_t lo, std::size_t hi, double& mean, double& var) {
    const double s = sum[hi] - sum[lo];
    const double q = sq[hi] - sq[lo];
    mean = s / w;
    var = std::max((q - s * mean) / (w - 1.0), variance_floor);
  };

  // t[i] compares [i - w, i) against [i, i + w); defined for i in [w, n - w].
  std::vector<double> t(n + 1, 0.0);
  for (std::size_t i = window; i + window <= n; ++i) {
    double m1, v1, m2, v2;
    moments(i - window, i, m1, v1);
    moments(i, i + window, m2, v2);
    t[i] = std::abs(m2 - m1) / std::sqrt(v1 / w + v2 / w);
  }

  std::vector<std::size_t> peaks;
  std::vector<double> peak_t;
  for (std::size_t i = window; i + window <= n; ++i) {
    if (!(t[i] > threshold_t)) continue;
    const bool rising = i == window || t[i] > t[i - 1];
    const bool not_falling_next = i + window == n || t[i] >= t[i + 1];
    if (!rising || !not_falling_next) continue;
    if (i < min_event_length || n - i < min_event_length) continue;
    if (!peaks.empty() && i - peaks.back() < min_event_length) {
      if (t[i] > peak_t.back()) {
        peaks.back() = i;
        peak_t.back() = t[i];
      }
      continue;
    }
    peaks.push_back(i);
    peak_t.push_back(t[i]);
  }
  return peaks;
}

std::uint16_t symbol_of_code(std::int16_t code, const QuantizationParams& q, FixedPointFormat fmt) {
  const std::int64_t offset = std::int64_t{4} << fmt.fractional_bits;  // +4 sigma in code units
  const std::int64_t span = std::int64_t{8} << fmt.fractional_bits;
  const std::int64_t shifted = std::clamp<std::int64_t>(code + offset, 0, span);
  const std::int64_t level = shifted * static_cast<std::int64_t>(q.levels()) / span;
  return static_cast<std::uint16_t>(std::min<std::int64_t>(level, q.levels() - 1));
}

std::vector<Event> detect_events(const QuantizedSignal& signal, const EventParams& params,
                                 StepTrace* trace) {
  params.format.validate();
  const auto& q = signal.params;
  std::vector<double> values(signal.levels.begin(), signal.levels.end());
  const auto bounds = segment_boundaries(values, params.window, params.threshold_t,
                                         params.min_event_length, kQuantisationVariance);

  // Bucket centres, precomputed once per level.
  std::vector<std::int16_t> center_code(q.levels());
  std::vector<double> center_value(q.levels());
  for (std::uint32_t l = 0; l < q.levels(); ++l) {
    center_value[l] = q.center(l);
    center_code[l] = to_fixed(center_value[l], params.format);
  }

  std::vector<Event> events;
  events.reserve(bounds.size() + 1);
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    Event e;
    e.start_index = static_cast<std::uint32_t>(start);
    e.length = static_cast<std::uint32_t>(end - start);
    if (params.arithmetic == Arithmetic::fixed) {
      std::int64_t acc = 0;
      for (std::size_t i = start; i < end; ++i) acc += center_code[signal.levels[i]];
      e.mean_code = static_cast<std::int16_t>(div_round_even(acc, static_cast<std::int64_t>(e.length)));
      e.symbol = symbol_of_code(e.mean_code, q, params.format);
    } else {
      double acc = 0.0;
      for (std::size_t i = start; i < end; ++i) acc += center_value[signal.levels[i]];
      const double mean = acc / static_cast<double>(e.length);
      e.mean_code = to_fixed(mean, params.format);
      e.symbol = q.bucket(mean);
    }
    events.push_back(e);
    start = end;
  };
  for (std::size_t b : bounds) emit(b);
  emit(signal.levels.size());

  if (trace) {
    const std::uint64_t n = signal.levels.size();
    const std::uint64_t positions = n - 2 * params.window + 1;
    const std::uint64_t m = events.size();
    trace->add(OpClass::add, 2 * n + 6 * positions + n + m);
    trace->add(OpClass::multiply, n + 4 * positions + m);
    trace->add(OpClass::divide, 2 * positions + m);
    trace->add(OpClass::compare, 5 * positions + m);
    trace->bytes_in += n * value_bytes(params.arithmetic);
    trace->bytes_out += m * value_bytes(params.arithmetic);
    trace->work_items += n;
  }
  return events;
}

EventSequence signal_to_events(const RawSignal& raw, int bucket_bits, const EventParams& params,
                               StepTrace* quantize_trace, StepTrace* detect_trace) {
  auto quantized = normalize_and_quantize(raw.samples, bucket_bits, quantize_trace);
  if (quantize_trace) quantize_trace->bytes_out += raw.samples.size() * value_bytes(params.arithmetic);
  EventSequence seq;
  seq.read_id = raw.read_id;
  seq.params = quantized.params;
  seq.format = params.format;
  seq.events = detect_events(quantized, params, detect_trace);
  if (params.merge_repeats) {
    const std::size_t before = seq.events.size();
    const std::size_t removed = merge_repeated_symbols(seq);
    if (detect_trace) {
      detect_trace->add(OpClass::compare, before);
      detect_trace->add(OpClass::add, 2 * removed);
      detect_trace->add(OpClass::multiply, 2 * removed);
      detect_trace->add(OpClass::divide, removed);
      detect_trace->bytes_out -= removed * value_bytes(params.arithmetic);
    }
  }
  return seq;
}

EventSequence signal_to_events_detect_first(const RawSignal& raw, int bucket_bits,
                                            const EventParams& params) {
  if (raw.samples.size() < kMinSignalSamples) throw Error("signal too short");
  QuantizationParams q;
  q.bucket_bits = bucket_bits;
  q.shift = median(raw.samples);
  q.scale = kMadToSigma * median_absolute_deviation(raw.samples, q.shift);
  if (!(q.scale > 0.0)) q.scale = population_stddev(raw.samples);
  if (!(q.scale > 0.0)) throw Error("zero dispersion: signal is constant");
  q.validate();

  // Segment in bucket-width units so the variance floor matches the quantised path.
  std::vector<double> z;
  z.reserve(raw.samples.size());
  for (double x : raw.samples) {
    z.push_back(std::clamp(q.normalize(x), -QuantizationParams::kClamp, QuantizationParams::kClamp));
  }
  std::vector<double> scaled(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = z[i] / q.bucket_width();
  const auto bounds = segment_boundaries(scaled, params.window, params.threshold_t,
                                         params.min_event_length, kQuantisationVariance);

  EventSequence seq;
  seq.read_id = raw.read_id;
  seq.params = q;
  seq.format = params.format;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += z[i];
    const double mean = acc / static_cast<double>(end - start);
    const std::uint16_t level = q.bucket(mean);
    seq.events.push_back({to_fixed(q.center(level), params.format), level,
                          static_cast<std::uint32_t>(end - start), static_cast<std::uint32_t>(start)});
    start = end;
  };
  for (std::size_t b : bounds) emit(b);
  emit(z.size());
  return seq;
}

EventSequence reference_to_events(const Sequence& seq, const PoreModel& model, int bucket_bits,
                                  FixedPointFormat format) {
  format.validate();
  const int k = model.k();
  if (seq.bases.size() < static_cast<std::size_t>(k)) {
    throw Error("reference_to_events: sequence shorter than k=" + std::to_string(k));
  }
  EventSequence out;
  out.read_id = seq.id;
  out.format = format;
  out.params.bucket_bits = bucket_bits;
  out.params.shift = model.global_shift();
  out.params.scale = model.global_scale();
  out.params.validate();

  const std::uint32_t mask = (1u << (2 * k)) - 1u;
  std::uint32_t code = 0;
  out.events.reserve(seq.bases.size() - static_cast<std::size_t>(k) + 1);
  for (std::size_t i = 0; i < seq.bases.size(); ++i) {
    const int b = base_code(seq.bases[i]);
    if (b < 0) {
      throw Error("reference_to_events: unknown character '" + std::string(1, seq.bases[i]) +
                  "' at offset " + std::to_string(i));
    }
    code = ((code << 2) | static_cast<std::uint32_t>(b)) & mask;
    if (i + 1 < static_cast<std::size_t>(k)) continue;
    const std::uint16_t level = out.params.bucket(out.params.normalize(model.level(code).mean));
    const auto pos = static_cast<std::uint32_t>(i + 1 - static_cast<std::size_t>(k));
    out.events.push_back({to_fixed(out.params.center(level), format), level, 1, pos});
  }
  return out;
}

std::size_t merge_repeated_symbols(EventSequence& seq) {
  seq.merged_repeats = true;
  auto& ev = seq.events;
  if (ev.empty()) return 0;
  std::size_t out = 0;
  for (std::size_t i = 1; i < ev.size(); ++i) {
    Event& last = ev[out];
    const Event& e = ev[i];
    if (e.symbol != last.symbol) {
      ev[++out] = e;
      continue;
    }
    const std::int64_t total = std::int64_t{last.length} + e.length;
    const std::int64_t acc = std::int64_t{last.mean_code} * last.length + std::int64_t{e.mean_code} * e.length;
    last.mean_code = static_cast<std::int16_t>(div_round_even(acc, total));
    last.length = static_cast<std::uint32_t>(total);
  }
  const std::size_t removed = ev.size() - (out + 1);
  ev.resize(out + 1);
  return removed;
}

void write_events_tsv(std::ostream& out, const EventSequence& events) {
  out << "index\tstart\tlength\tcode\tsymbol\n";
  for (std::size_t i = 0; i < events.events.size(); ++i) {
    const auto& e = events.events[i];
    out << i << '\t' << e.start_index << '\t' << e.length << '\t' << e.mean_code << '\t' << e.symbol
        << '\n';
  }
}

}  // namespace rawisp
