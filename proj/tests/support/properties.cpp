#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rawisp/event_pipeline.hpp"
#include "rawisp/fixed_point.hpp"
#include "rawisp/isp_sim.hpp"
#include "rawisp/mapper.hpp"
#include "rawisp/random.hpp"
#include "rawisp/reference_index.hpp"
#include "rawisp/signal_model.hpp"
#include "rawisp/trace.hpp"

namespace rawisp::testing {

void PropertyOutcome::record(std::size_t case_index, bool ok, const std::string& what) {
  if (ok) return;
  if (failures++ == 0) first_failure = "case " + std::to_string(case_index) + ": " + what;
}

namespace {

// Piecewise-constant current with Gaussian noise: 1..40-sample plateaus.
std::vector<double> random_plateaus(Rng& rng, std::size_t n) {
  std::vector<double> x;
  x.reserve(n);
  const double noise = 0.1 + rng.uniform(0.0, 4.0);
  while (x.size() < n) {
    const double level = rng.uniform(60.0, 130.0);
    const std::size_t len = 1 + rng.below(40);
    for (std::size_t i = 0; i < len && x.size() < n; ++i) x.push_back(level + noise * rng.gaussian());
  }
  return x;
}

template <class T>
bool is_subsequence(const std::vector<T>& sub, const std::vector<T>& full) {
  std::size_t j = 0;
  for (const T& v : full) {
    if (j < sub.size() && sub[j] == v) ++j;
  }
  return j == sub.size();
}

// Small reference, its index, and random reads (on-genome or pure noise)
// mapped with random parameters.
class TraceSource {
 public:
  explicit TraceSource(std::uint64_t seed)
      : rng_(seed),
        model_(synth_pore_model(6, derive_seed(seed, 1))),
        reference_(generate_reference(20'000, 0.2, derive_seed(seed, 2))),
        index_(index_reference(reference_, model_)) {}

  MappingResult next() {
    RawSignal raw;
    SignalParams sp;
    sp.noise_std = rng_.uniform(0.0, 4.0);
    sp.samples_per_event_mean = rng_.uniform(4.0, 12.0);
    sp.dwell = rng_.below(2) ? DwellModel::geometric : DwellModel::fixed;
    const std::uint64_t kind = rng_.below(8);
    if (kind == 0) {
      raw.read_id = "noise";
      const std::size_t n = rng_.below(4000);
      for (std::size_t i = 0; i < n; ++i) raw.samples.push_back(95.0 + 12.0 * rng_.gaussian());
    } else {
      const std::size_t len = 6 + rng_.below(1500);
      const std::size_t pos = rng_.below(reference_.bases.size() - len);
      Sequence piece{"r", reference_.bases.substr(pos, len)};
      if (kind == 1) piece.bases = reverse_complement(piece.bases);
      raw = sequence_to_signal(piece, model_, sp, rng_.next());
    }
    MapParams mp;
    mp.events.window = 3 + rng_.below(6);
    mp.events.threshold_t = rng_.uniform(2.5, 6.0);
    mp.events.min_event_length = 1 + rng_.below(4);
    mp.events.arithmetic = rng_.below(2) ? Arithmetic::fixed : Arithmetic::floating;
    switch (rng_.below(3)) {
      case 0: mp.filters = kSmallGenomeFilters; break;
      case 1: mp.filters = kFiltersDisabled; break;
      default:
        mp.filters = {static_cast<std::uint32_t>(1 + rng_.below(50)), static_cast<std::uint32_t>(1 + rng_.below(8)),
                      static_cast<std::uint32_t>(2 + rng_.below(600))};
    }
    return map_read(raw, index_, mp);
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
  PoreModel model_;
  Sequence reference_;
  ReferenceIndex index_;
};

}  // namespace

PropertyOutcome quantization_monotonicity(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "quantization monotonicity";
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    const int bits = 2 + static_cast<int>(rng.below(9));
    std::vector<double> x = random_plateaus(rng, 32 + rng.below(600));
    // Outliers exercise the clamp.
    for (int k = 0; k < 3; ++k) x[rng.below(x.size())] = rng.uniform(-500.0, 800.0);
    const QuantizedSignal q = normalize_and_quantize(x, bits);

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    bool ok = q.levels.size() == x.size();
    for (std::size_t i = 0; ok && i < order.size(); ++i) {
      ok = q.levels[order[i]] < (1u << bits) && (i == 0 || q.levels[order[i - 1]] <= q.levels[order[i]]);
    }
    out.record(c, ok, "sample order not preserved at bucket_bits=" + std::to_string(bits));

    QuantizationParams p;
    p.bucket_bits = bits;
    p.shift = rng.uniform(-200.0, 200.0);
    p.scale = rng.uniform(0.01, 50.0);
    double a = rng.uniform(-1000.0, 1000.0);
    double b = rng.below(4) == 0 ? a : rng.uniform(-1000.0, 1000.0);
    if (b < a) std::swap(a, b);
    const auto la = p.bucket(p.normalize(a));
    const auto lb = p.bucket(p.normalize(b));
    out.record(c, la <= lb && lb < p.levels(), "bucket(" + std::to_string(a) + ") > bucket(" + std::to_string(b) + ")");
  }
  return out;
}

PropertyOutcome fixed_point_round_trip(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "fixed-point round trip";
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    const FixedPointFormat fmt{static_cast<int>(rng.below(16))};
    const double bound = std::ldexp(1.0, -fmt.fractional_bits - 1);
    bool ok = true;
    std::ostringstream why;
    why.precision(17);
    for (int k = 0; k < 16 && ok; ++k) {
      const double x = rng.uniform(fmt.min_value(), fmt.max_value());
      const std::int16_t code = to_fixed(x, fmt, Saturation::error);
      const double err = std::abs(from_fixed(code, fmt) - x);
      if (err > bound) {
        ok = false;
        why << "f=" << fmt.fractional_bits << " x=" << x << " error " << err;
      }
      const double y = rng.uniform(fmt.min_value(), fmt.max_value());
      if (ok && (x < y) && to_fixed(x, fmt) > to_fixed(y, fmt)) {
        ok = false;
        why << "f=" << fmt.fractional_bits << " order broken for " << x << " < " << y;
      }
      const auto raw = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(65536)) - 32768);
      if (ok && to_fixed(from_fixed(raw, fmt), fmt) != raw) {
        ok = false;
        why << "f=" << fmt.fractional_bits << " code " << raw << " not reproduced";
      }
    }
    out.record(c, ok, why.str());
  }
  return out;
}

// Fixed mode buckets the mean code itself. Float mode buckets the exact mean,
// which the stored code only pins down to within half a code step.
namespace {

bool symbol_matches_code(const Event& e, const EventSequence& ev, Arithmetic arithmetic) {
  if (arithmetic == Arithmetic::fixed) return e.symbol == symbol_of_code(e.mean_code, ev.params, ev.format);
  const double v = from_fixed(e.mean_code, ev.format), half = ev.format.resolution() / 2.0;
  return ev.params.bucket(v - half) <= e.symbol && e.symbol <= ev.params.bucket(v + half);
}

}  // namespace

PropertyOutcome event_partition_tiling(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "event partition tiling";
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    EventParams ep;
    ep.window = 3 + rng.below(6);
    ep.threshold_t = rng.uniform(1.5, 8.0);
    ep.min_event_length = 1 + rng.below(6);
    ep.format.fractional_bits = 6 + static_cast<int>(rng.below(5));
    ep.arithmetic = rng.below(2) ? Arithmetic::fixed : Arithmetic::floating;
    ep.merge_repeats = rng.below(2) == 0;
    const int bits = 2 + static_cast<int>(rng.below(9));
    RawSignal raw{"r", random_plateaus(rng, std::max<std::size_t>(32, 2 * ep.window) + rng.below(2000)), {}};

    const EventSequence ev = signal_to_events(raw, bits, ep);
    std::string problem;
    std::uint64_t covered = 0;
    for (std::size_t i = 0; i < ev.events.size() && problem.empty(); ++i) {
      const Event& e = ev.events[i];
      if (e.length == 0) problem = "empty event";
      else if (e.start_index != covered) problem = "gap or overlap before event " + std::to_string(i);
      else if (!ep.merge_repeats && e.length < std::min<std::size_t>(ep.min_event_length, raw.samples.size()))
        problem = "event shorter than min_event_length";
      else if (e.symbol >= (1u << bits) || !symbol_matches_code(e, ev, ep.arithmetic))
        problem = std::string("symbol inconsistent with mean code (") + (ep.arithmetic == Arithmetic::fixed ? "fixed" : "float") + ")";
      else if (ep.merge_repeats && i > 0 && ev.events[i - 1].symbol == e.symbol)
        problem = "adjacent events share a symbol after folding";
      covered += e.length;
    }
    if (problem.empty() && (ev.events.empty() || covered != raw.samples.size())) problem = "events do not cover the signal";
    out.record(c, problem.empty(), problem);
  }
  return out;
}

PropertyOutcome filter_laws(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "filter subset/idempotence/monotonicity";
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    // Few levels and short seeds make frequent hashes common.
    const int bits = 2 + static_cast<int>(rng.below(3));
    const std::size_t n = 2 + rng.below(4);
    EventSequence ref;
    ref.params.bucket_bits = bits;
    const std::size_t m = n + rng.below(1500);
    std::uint32_t pos = 0;
    for (std::size_t i = 0; i < m; ++i) {
      Event e;
      e.symbol = static_cast<std::uint16_t>(rng.below(1u << bits));
      e.start_index = pos;
      e.length = 1;
      pos += 1 + static_cast<std::uint32_t>(rng.below(3));
      ref.events.push_back(e);
    }
    const std::uint64_t ref_len = pos;
    const ReferenceIndex index = build_index(ref, n, ref_len);

    std::vector<Seed> seeds;
    const std::size_t s = rng.below(300);
    for (std::size_t i = 0; i < s; ++i) {
      const SeedHash h = rng.below(4) == 0 ? static_cast<SeedHash>(rng.next())
                                           : index.hashes()[rng.below(index.hashes().size())];
      seeds.push_back({static_cast<std::uint32_t>(rng.below(400)), h});
    }
    std::uint32_t t1 = static_cast<std::uint32_t>(rng.below(20));
    std::uint32_t t2 = static_cast<std::uint32_t>(rng.below(20));
    if (t2 < t1) std::swap(t1, t2);

    const auto f1 = frequency_filter(index, seeds, t1);
    const auto f2 = frequency_filter(index, seeds, t2);
    std::string problem;
    if (!is_subsequence(f1, seeds)) problem = "frequency filter output not a subset";
    else if (frequency_filter(index, f1, t1) != f1) problem = "frequency filter not idempotent";
    else if (!is_subsequence(f1, f2)) problem = "frequency filter not monotone in threshold";
    else if (frequency_filter(index, seeds, kFiltersDisabled.thresh_freq).size() != seeds.size())
      problem = "disabled frequency filter drops seeds";
    for (const Seed& sd : f1) {
      if (problem.empty() && index.frequency(sd.hash) > t1) problem = "kept seed above threshold";
    }

    const auto anchors = collect_anchors(index, f2);
    FilterParams v1{kFiltersDisabled.thresh_freq, 1 + static_cast<std::uint32_t>(rng.below(8)),
                    2 + static_cast<std::uint32_t>(rng.below(600))};
    FilterParams v2 = v1;
    v2.thresh_voting = 1 + static_cast<std::uint32_t>(rng.below(v1.thresh_voting));
    const auto a1 = seed_and_vote(anchors, ref_len, v1);
    const auto a2 = seed_and_vote(anchors, ref_len, v2);
    if (!problem.empty()) {
    } else if (!is_subsequence(a1, anchors)) problem = "seed-and-vote output not a subset";
    else if (seed_and_vote(a1, ref_len, v1) != a1) problem = "seed-and-vote not idempotent";
    else if (!is_subsequence(a1, a2)) problem = "seed-and-vote not monotone in threshold";
    else if (seed_and_vote(anchors, ref_len, {0, 1, v1.voting_window}) != anchors)
      problem = "voting threshold 1 is not the identity";
    out.record(c, problem.empty(), problem);
  }
  return out;
}

PropertyOutcome trace_byte_conservation(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "trace byte conservation";
  TraceSource source(seed);
  OperationTrace total;
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    const MappingResult r = source.next();
    total += r.trace;
    std::string problem;
    if (!r.trace.conserves_bytes()) problem = "read trace loses or gains bytes between steps";
    else if (!total.conserves_bytes()) problem = "summed trace loses or gains bytes between steps";
    else if (r.read_events > 0 && r.trace[Step::event_detect].bytes_out == 0) problem = "events but no event bytes";
    out.record(c, problem.empty(), problem);
  }
  return out;
}

std::vector<PropertyOutcome> invariant_suites(std::uint64_t seed, std::size_t cases) {
  return {quantization_monotonicity(derive_seed(seed, 1), cases), fixed_point_round_trip(derive_seed(seed, 2), cases),
          event_partition_tiling(derive_seed(seed, 3), cases), filter_laws(derive_seed(seed, 4), cases),
          trace_byte_conservation(derive_seed(seed, 5), cases)};
}

PropertyOutcome simulator_laws(std::uint64_t seed, std::size_t cases) {
  PropertyOutcome out;
  out.name = "simulator orderings";
  TraceSource source(seed);
  const HardwareConfig base;
  const HardwareConfig doubled = scale_dram(base, 2);
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    OperationTrace t = source.next().trace;
    // Pretend the index belongs to a genome up to ~5e4 times larger.
    t.index_bytes *= 1 + source.rng().below(50'000);
    std::string problem;
    const double mars = simulate(t, System::mars, base).latency_s();
    const double smart = simulate(t, System::ms_smartssd, base).latency_s();
    const double ext = simulate(t, System::mars_external, base).latency_s();
    const double big = simulate(t, System::mars, doubled).latency_s();
    std::ostringstream ss;
    ss.precision(17);
    if (!(mars <= smart && smart <= ext)) ss << "latency order MARS " << mars << ", SmartSSD " << smart << ", External " << ext;
    else if (big > mars) ss << "doubling DRAM slowed MARS from " << mars << " to " << big;
    else if (big > 0.0 && mars / big > 2.0) ss << "doubling DRAM sped MARS up by " << mars / big;

    // Energy is linear once the query step's row sweeps are out of the picture.
    OperationTrace lin = t;
    lin[Step::query].ops[static_cast<std::size_t>(OpClass::lookup)] = 0;
    OperationTrace twice = lin;
    for (auto& st : twice.steps) {
      for (auto& o : st.ops) o *= 2;
      st.bytes_in *= 2;
      st.bytes_out *= 2;
    }
    for (auto& b : twice.sort_buckets) {
      b.network_stages *= 2;
      b.merge_steps *= 2;
    }
    for (System sys : kAllSystems) {
      const double e1 = simulate(lin, sys, base).energy_j();
      const double e2 = simulate(twice, sys, base).energy_j();
      if (ss.str().empty() && e2 != 2.0 * e1) ss << system_name(sys) << " energy " << e1 << " doubled to " << e2;
    }
    out.record(c, ss.str().empty(), ss.str());
  }
  return out;
}

}  // namespace rawisp::testing
