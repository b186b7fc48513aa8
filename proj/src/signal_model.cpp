#include "rawisp/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rawisp/error.hpp"
#include "rawisp/random.hpp"
#include "rawisp/stats.hpp"

namespace rawisp {

namespace {

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

}  // namespace

int base_code(char base) noexcept {
  switch (base) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: return -1;
  }
}

std::string reverse_complement(std::string_view bases) {
  std::string out(bases.rbegin(), bases.rend());
  for (char& c : out) {
    const int code = base_code(c);
    c = code < 0 ? 'N' : kBases[3 - code];
  }
  return out;
}

void validate_bases(std::string& bases) {
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const int code = base_code(bases[i]);
    if (code < 0) {
      throw Error("invalid base '" + std::string(1, bases[i]) + "' at offset " + std::to_string(i));
    }
    bases[i] = kBases[code];
  }
}

PoreModel::PoreModel(int k, std::vector<PoreLevel> levels) : k_(k), levels_(std::move(levels)) {
  if (k < 1 || k > 12) throw Error("pore model k out of range: " + std::to_string(k));
  const std::size_t expected = std::size_t{1} << (2 * k);
  if (levels_.size() != expected) {
    throw Error("incomplete table: expected " + std::to_string(expected) + " k-mers, got " +
                std::to_string(levels_.size()));
  }
  std::vector<double> means;
  means.reserve(levels_.size());
  for (const auto& lvl : levels_) {
    if (!(lvl.mean > 0.0 && lvl.mean < 300.0)) throw Error("level mean outside (0, 300) pA");
    if (!(lvl.stdv >= 0.0)) throw Error("negative level stdv");
    means.push_back(lvl.mean);
  }
  shift_ = median(means);
  scale_ = kMadToSigma * median_absolute_deviation(means, shift_);
  if (scale_ <= 0.0) scale_ = population_stddev(means);
  if (scale_ <= 0.0) scale_ = 1.0;  // single-level models (k-mer table of identical means)
}

const PoreLevel& PoreModel::level(std::string_view kmer) const {
  if (static_cast<int>(kmer.size()) != k_) throw Error("k-mer length mismatch");
  std::uint32_t code = 0;
  for (char c : kmer) {
    const int b = base_code(c);
    if (b < 0) throw Error("invalid base in k-mer '" + std::string(kmer) + "'");
    code = (code << 2) | static_cast<std::uint32_t>(b);
  }
  return levels_[code];
}

const std::vector<DatasetPreset>& dataset_presets() {
  // Genome sizes follow the evaluation datasets; read counts are scaled down
  // to desk size and mean lengths are bases / reads of each dataset.
  static const std::vector<DatasetPreset> presets = {
      {"d1-like", 29'903, 500, 430},
      {"d2-like", 5'000'000, 200, 6'694},
      {"d3-like", 12'000'000, 100, 7'602},
      {"d4-like", 111'000'000, 50, 20'345},
      {"d5-like", 3'117'000'000ULL, 50, 5'877},
  };
  return presets;
}

const DatasetPreset& find_preset(std::string_view name) {
  for (const auto& p : dataset_presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : dataset_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw Error("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

PoreModel synth_pore_model(int k, std::uint64_t seed) {
  if (k < 1 || k > 8) throw Error("synth_pore_model: k must be in [1, 8], got " + std::to_string(k));
  Rng rng(seed);
  std::vector<PoreLevel> levels(std::size_t{1} << (2 * k));
  for (auto& lvl : levels) {
    lvl.mean = rng.uniform(60.0, 130.0);
    lvl.stdv = 2.0;
  }
  return PoreModel(k, std::move(levels));
}

std::string repeat_motif(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  std::string motif(kRepeatMotifLength, 'A');
  for (char& c : motif) c = kBases[rng.below(4)];
  return motif;
}

Sequence generate_reference(std::uint64_t length, double repeat_fraction, std::uint64_t seed,
                            std::string id) {
  if (length < 1000) throw Error("generate_reference: length must be >= 1000");
  if (!(repeat_fraction >= 0.0 && repeat_fraction <= 1.0)) {
    throw Error("generate_reference: repeat_fraction must lie in [0, 1]");
  }
  Rng rng(derive_seed(seed, 0));
  Sequence seq{std::move(id), std::string(length, 'A')};
  for (char& c : seq.bases) c = kBases[rng.below(4)];

  const std::uint64_t slots = length / kRepeatMotifLength;
  const auto copies = std::min<std::uint64_t>(
      slots, static_cast<std::uint64_t>(std::llround(repeat_fraction * static_cast<double>(length) /
                                                     kRepeatMotifLength)));
  if (copies == 0) return seq;

  const std::string motif = repeat_motif(seed);
  std::vector<std::uint64_t> slot_ids(slots);
  std::iota(slot_ids.begin(), slot_ids.end(), 0);
  Rng shuffle(derive_seed(seed, 2));
  for (std::uint64_t i = 0; i < copies; ++i) {  // partial Fisher-Yates
    const std::uint64_t j = i + shuffle.below(slots - i);
    std::swap(slot_ids[i], slot_ids[j]);
  }
  for (std::uint64_t i = 0; i < copies; ++i) {
    seq.bases.replace(slot_ids[i] * kRepeatMotifLength, kRepeatMotifLength, motif);
  }
  return seq;
}

RawSignal sequence_to_signal(const Sequence& seq, const PoreModel& model, const SignalParams& params,
                             std::uint64_t seed) {
  const int k = model.k();
  if (seq.bases.size() < static_cast<std::size_t>(k)) {
    throw Error("sequence_to_signal: sequence shorter than k=" + std::to_string(k));
  }
  if (!(params.samples_per_event_mean >= 1.0)) {
    throw Error("sequence_to_signal: samples_per_event_mean must be >= 1");
  }
  if (!(params.noise_std >= 0.0)) throw Error("sequence_to_signal: noise_std must be >= 0");

  Rng dwell_rng(derive_seed(seed, 10));
  Rng noise_rng(derive_seed(seed, 11));
  const double mean = params.samples_per_event_mean;
  const auto max_dwell = static_cast<std::uint64_t>(std::floor(4.0 * mean));
  // Each geometric component has mean (mean - 1) / 2 failures.
  const double p = 1.0 / (1.0 + (mean - 1.0) / 2.0);

  RawSignal out;
  out.read_id = seq.id;
  const std::uint32_t mask = (k >= 16) ? 0xffffffffu : ((1u << (2 * k)) - 1u);
  std::uint32_t code = 0;
  for (std::size_t i = 0; i < seq.bases.size(); ++i) {
    const int b = base_code(seq.bases[i]);
    if (b < 0) throw Error("sequence_to_signal: invalid base at offset " + std::to_string(i));
    code = ((code << 2) | static_cast<std::uint32_t>(b)) & mask;
    if (i + 1 < static_cast<std::size_t>(k)) continue;

    std::uint64_t dwell = 0;
    if (params.dwell == DwellModel::fixed) {
      dwell = static_cast<std::uint64_t>(std::llround(mean));
    } else {
      dwell = 1 + dwell_rng.geometric(p) + dwell_rng.geometric(p);
      dwell = std::clamp<std::uint64_t>(dwell, 1, std::max<std::uint64_t>(1, max_dwell));
    }
    const double level = model.level(code).mean;
    for (std::uint64_t d = 0; d < dwell; ++d) {
      const double noise = params.noise_std > 0.0 ? params.noise_std * noise_rng.gaussian() : 0.0;
      out.samples.push_back(level + noise);
    }
  }
  return out;
}

std::vector<RawSignal> generate_read_set(const Sequence& reference, const DatasetPreset& preset,
                                         const PoreModel& model, const ReadSetParams& params,
                                         std::uint64_t seed) {
  const std::uint64_t ref_len = reference.bases.size();
  const std::uint64_t min_len = static_cast<std::uint64_t>(model.k()) + 10;
  if (preset.mean_read_length > ref_len) {
    throw Error("preset '" + preset.name + "' mean read length " +
                std::to_string(preset.mean_read_length) + " exceeds reference length " +
                std::to_string(ref_len));
  }
  if (ref_len < min_len) throw Error("reference too short for read generation");

  Rng rng(derive_seed(seed, 20));
  std::vector<RawSignal> reads;
  reads.reserve(preset.read_count);
  const double mean = static_cast<double>(preset.mean_read_length);
  for (std::uint64_t r = 0; r < preset.read_count; ++r) {
    const double drawn = mean + (mean / 10.0) * rng.gaussian();
    const auto len = std::clamp<std::uint64_t>(
        static_cast<std::uint64_t>(std::llround(std::max(0.0, drawn))), min_len, ref_len);
    const std::uint64_t start = rng.below(ref_len - len + 1);
    const bool reverse = params.reverse_strand && (rng.below(2) == 1);

    TruthOrigin truth{reference.id, start, reverse ? Strand::reverse : Strand::forward, len};
    Sequence fragment{"read_" + std::to_string(r), truth_bases(reference, truth)};
    RawSignal sig = sequence_to_signal(fragment, model, params.signal, rng.next());
    sig.truth = std::move(truth);
    reads.push_back(std::move(sig));
  }
  return reads;
}

std::string truth_bases(const Sequence& reference, const TruthOrigin& truth) {
  if (truth.position + truth.length > reference.bases.size()) {
    throw Error("truth origin exceeds reference length");
  }
  std::string_view span(reference.bases.data() + truth.position, truth.length);
  return truth.strand == Strand::forward ? std::string(span) : reverse_complement(span);
}

}  // namespace rawisp
