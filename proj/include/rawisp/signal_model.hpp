#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rawisp {

struct Sequence {
  std::string id;
  std::string bases;  // uppercase A/C/G/T only
};

// Expected current for one k-mer, in picoamperes.
struct PoreLevel {
  double mean = 0.0;
  double stdv = 0.0;

  friend bool operator==(const PoreLevel&, const PoreLevel&) = default;
};

// k-mer -> current level table. Levels are indexed by the 2-bit packed k-mer
// (A=0, C=1, G=2, T=3, first base most significant).
class PoreModel {
 public:
  PoreModel() = default;
  PoreModel(int k, std::vector<PoreLevel> levels);

  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return levels_.size(); }
  const std::vector<PoreLevel>& levels() const noexcept { return levels_; }

  const PoreLevel& level(std::uint32_t kmer_code) const { return levels_.at(kmer_code); }
  const PoreLevel& level(std::string_view kmer) const;

  // Robust location/spread of the level means: median and 1.4826 * MAD.
  // These are the statistics a long read's own normalisation converges to,
  // so reference and read codes share one scale.
  double global_shift() const noexcept { return shift_; }
  double global_scale() const noexcept { return scale_; }

  friend bool operator==(const PoreModel&, const PoreModel&) = default;

 private:
  int k_ = 0;
  std::vector<PoreLevel> levels_;
  double shift_ = 0.0;
  double scale_ = 0.0;
};

enum class Strand : std::uint8_t { forward, reverse };

struct TruthOrigin {
  std::string reference_id;
  std::uint64_t position = 0;  // 0-based start on the forward reference
  Strand strand = Strand::forward;
  std::uint64_t length = 0;    // bases covered by the read

  friend bool operator==(const TruthOrigin&, const TruthOrigin&) = default;
};

struct RawSignal {
  std::string read_id;
  std::vector<double> samples;  // picoamperes
  std::optional<TruthOrigin> truth;

  friend bool operator==(const RawSignal&, const RawSignal&) = default;
};

struct DatasetPreset {
  std::string name;
  std::uint64_t genome_size = 0;
  std::uint64_t read_count = 0;
  std::uint64_t mean_read_length = 0;
};

// Named presets shaped after the evaluation datasets (d1-like .. d5-like).
const std::vector<DatasetPreset>& dataset_presets();
const DatasetPreset& find_preset(std::string_view name);

// 2-bit code of a base, or -1 for anything outside ACGT (case-insensitive).
int base_code(char base) noexcept;
std::string reverse_complement(std::string_view bases);
// Uppercases and rejects characters outside ACGT.
void validate_bases(std::string& bases);

// Mean level spread of 4^k random k-mers drawn uniformly from [60, 130] pA,
// stdv fixed at 2 pA. Deterministic per seed.
PoreModel synth_pore_model(int k, std::uint64_t seed);

// length >= 1000. repeat_fraction of the sequence is made of copies of one
// random 500-base motif placed on disjoint 500-base slots; the rest is iid.
Sequence generate_reference(std::uint64_t length, double repeat_fraction, std::uint64_t seed,
                            std::string id = "ref");

inline constexpr std::size_t kRepeatMotifLength = 500;
// The motif generate_reference plants for a given seed.
std::string repeat_motif(std::uint64_t seed);

enum class DwellModel : std::uint8_t {
  fixed,      // every k-mer dwells exactly samples_per_event_mean samples
  geometric,  // 1 + G1 + G2, Gi geometric, clamped to [1, 4 * mean]
};

struct SignalParams {
  double samples_per_event_mean = 10.0;
  double noise_std = 2.0;
  DwellModel dwell = DwellModel::geometric;
};

RawSignal sequence_to_signal(const Sequence& seq, const PoreModel& model,
                             const SignalParams& params, std::uint64_t seed);

struct ReadSetParams {
  SignalParams signal;
  bool reverse_strand = false;  // draw half the reads from the reverse complement
};

std::vector<RawSignal> generate_read_set(const Sequence& reference, const DatasetPreset& preset,
                                         const PoreModel& model, const ReadSetParams& params,
                                         std::uint64_t seed);

// Bases a simulated read covers on the reference, recovered from its truth record.
std::string truth_bases(const Sequence& reference, const TruthOrigin& truth);

}  // namespace rawisp
