#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/io.hpp"
#include "rawisp/random.hpp"
#include "rawisp/signal_model.hpp"
#include "support/fixtures.hpp"

namespace rawisp {
namespace {

std::string k1_table() { return "kmer\tlevel_mean\tlevel_stdv\nA\t80.0\t1\nC\t95.0\t1\nG\t110.0\t1\nT\t65.0\t1\n"; }

std::string kmer_of(std::uint32_t code, int k) {
  std::string s(static_cast<std::size_t>(k), 'A');
  for (int i = k - 1; i >= 0; --i, code >>= 2) s[static_cast<std::size_t>(i)] = "ACGT"[code & 3];
  return s;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

TEST(PoreModelLoad, SmallestCompleteTable) {
  std::istringstream in(k1_table());
  const PoreModel m = load_pore_model(in);
  EXPECT_EQ(m.k(), 1);
  EXPECT_EQ(m.size(), 4u);
  EXPECT_DOUBLE_EQ(m.level("A").mean, 80.0);
  EXPECT_DOUBLE_EQ(m.level("T").mean, 65.0);
  EXPECT_EQ(m, testing::k1_model());
}

TEST(PoreModelLoad, IncompleteTableNamesExpectedSize) {
  std::ostringstream table;
  table << "kmer\tlevel_mean\tlevel_stdv\n";
  for (std::uint32_t c = 0; c < 4095; ++c) table << kmer_of(c, 6) << "\t90\t2\n";
  std::istringstream in(table.str());
  try {
    load_pore_model(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("incomplete table: expected 4096"), std::string::npos) << e.what();
  }
}

TEST(PoreModelLoad, DuplicateKmerRejected) {
  std::ostringstream table;
  table << "kmer\tlevel_mean\tlevel_stdv\n";
  for (std::uint32_t c = 0; c < 4096; ++c) table << kmer_of(c, 6) << "\t90\t2\n";
  table << "ACGTAC\t91\t2\n";
  std::istringstream in(table.str());
  try {
    load_pore_model(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate k-mer"), std::string::npos) << e.what();
  }
}

TEST(PoreModelLoad, ExtraColumnsIgnoredAndOrderFree) {
  std::istringstream in("level_stdv\tkmer\tother\tlevel_mean\n1\tA\tx\t80\n1\tC\tx\t95\n1\tG\tx\t110\n1\tT\tx\t65\n");
  EXPECT_EQ(load_pore_model(in), testing::k1_model());
}

TEST(PoreModel, RejectsLevelsOutsidePhysicalRange) {
  EXPECT_THROW(PoreModel(1, {{80, 1}, {95, 1}, {300, 1}, {65, 1}}), Error);
  EXPECT_THROW(PoreModel(1, {{80, 1}, {95, 1}, {110, -1}, {65, 1}}), Error);
  EXPECT_THROW(PoreModel(1, {{80, 1}, {95, 1}, {110, 1}}), Error);
}

TEST(SynthPoreModel, DeterministicPerSeed) {
  std::ostringstream a, b;
  save_pore_model(a, synth_pore_model(2, 7));
  save_pore_model(b, synth_pore_model(2, 7));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(synth_pore_model(2, 7), synth_pore_model(2, 8));
}

TEST(SynthPoreModel, FullTableWithinRange) {
  const PoreModel m = synth_pore_model(6, 1);
  ASSERT_EQ(m.size(), 4096u);
  for (const auto& lvl : m.levels()) {
    EXPECT_GE(lvl.mean, 60.0);
    EXPECT_LE(lvl.mean, 130.0);
    EXPECT_DOUBLE_EQ(lvl.stdv, 2.0);
  }
}

TEST(SynthPoreModel, RejectsLargeK) { EXPECT_THROW(synth_pore_model(9, 1), Error); }

TEST(GenerateReference, LengthAndDeterminism) {
  const Sequence a = generate_reference(10'000, 0.0, 3);
  const Sequence b = generate_reference(10'000, 0.0, 3);
  EXPECT_EQ(a.bases.size(), 10'000u);
  EXPECT_EQ(a.bases, b.bases);
  EXPECT_TRUE(std::all_of(a.bases.begin(), a.bases.end(), [](char c) { return base_code(c) >= 0; }));
  EXPECT_NE(a.bases, generate_reference(10'000, 0.0, 4).bases);
}

TEST(GenerateReference, RepeatsPlantTheMotif) {
  const Sequence s = generate_reference(10'000, 0.3, 3);
  const std::string motif = repeat_motif(3);
  ASSERT_EQ(motif.size(), kRepeatMotifLength);
  EXPECT_GE(count_occurrences(s.bases, motif), 5u);
  EXPECT_LT(count_occurrences(generate_reference(10'000, 0.0, 3).bases, motif), 1u);
}

TEST(GenerateReference, RejectsShortGenome) { EXPECT_THROW(generate_reference(100, 0.0, 1), Error); }

TEST(SequenceToSignal, NoiselessIdentity) {
  SignalParams p;
  p.samples_per_event_mean = 1.0;
  p.dwell = DwellModel::fixed;
  p.noise_std = 0.0;
  const RawSignal s = sequence_to_signal({"x", "ACGT"}, testing::k1_model(), p, 1);
  EXPECT_EQ(s.samples, (std::vector<double>{80.0, 95.0, 110.0, 65.0}));
}

TEST(SequenceToSignal, SampleCountBounds) {
  const PoreModel m = synth_pore_model(6, 2);
  const Sequence seq = generate_reference(1000, 0.0, 5);
  SignalParams p;
  p.samples_per_event_mean = 10.0;
  p.noise_std = 1.5;
  const RawSignal s = sequence_to_signal(seq, m, p, 9);
  EXPECT_GE(s.samples.size(), 995u);
  EXPECT_LE(s.samples.size(), 4u * 10u * 995u);
}

TEST(SequenceToSignal, GeometricDwellMeanNearTarget) {
  const PoreModel m = synth_pore_model(6, 2);
  const Sequence seq = generate_reference(50'000, 0.0, 6);
  SignalParams p;
  const RawSignal s = sequence_to_signal(seq, m, p, 3);
  const double per_kmer = static_cast<double>(s.samples.size()) / static_cast<double>(seq.bases.size() - 5);
  EXPECT_NEAR(per_kmer, 10.0, 0.3);
}

TEST(SequenceToSignal, RejectsSequenceShorterThanK) {
  EXPECT_THROW(sequence_to_signal({"x", "AC"}, synth_pore_model(6, 1), {}, 1), Error);
}

TEST(GenerateReadSet, TruthInsideReference) {
  const Sequence ref = generate_reference(10'000, 0.0, 1);
  const PoreModel m = synth_pore_model(6, 1);
  const DatasetPreset preset{"t", 10'000, 100, 1000};
  ReadSetParams rp;
  rp.reverse_strand = true;
  const auto reads = generate_read_set(ref, preset, m, rp, 4);
  ASSERT_EQ(reads.size(), 100u);
  bool saw_reverse = false;
  for (const auto& r : reads) {
    ASSERT_TRUE(r.truth.has_value());
    EXPECT_LT(r.truth->position, 10'000u);
    EXPECT_LE(r.truth->position + r.truth->length, 10'000u);
    EXPECT_FALSE(r.samples.empty());
    saw_reverse |= r.truth->strand == Strand::reverse;
    const std::string bases = truth_bases(ref, *r.truth);
    const std::string forward = ref.bases.substr(r.truth->position, r.truth->length);
    EXPECT_EQ(bases, r.truth->strand == Strand::forward ? forward : reverse_complement(forward));
  }
  EXPECT_TRUE(saw_reverse);
}

TEST(GenerateReadSet, ZeroReadsGivesEmptySet) {
  const Sequence ref = generate_reference(10'000, 0.0, 1);
  EXPECT_TRUE(generate_read_set(ref, {"t", 10'000, 0, 1000}, synth_pore_model(6, 1), {}, 4).empty());
}

TEST(GenerateReadSet, RejectsReadsLongerThanGenome) {
  const Sequence ref = generate_reference(10'000, 0.0, 1);
  EXPECT_THROW(generate_read_set(ref, {"t", 10'000, 5, 20'000}, synth_pore_model(6, 1), {}, 4), Error);
}

TEST(Presets, KnownAndUnknown) {
  const DatasetPreset& d1 = find_preset("d1-like");
  EXPECT_EQ(d1.genome_size, 29'903u);
  EXPECT_EQ(d1.read_count, 500u);
  try {
    find_preset("d9-like");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("d1-like"), std::string::npos);
  }
  for (const auto& p : dataset_presets()) {
    EXPECT_GE(p.genome_size, 1000u);
    EXPECT_GE(p.read_count, 1u);
  }
}

TEST(Bases, ValidationAndReverseComplement) {
  std::string s = "acgTN";
  EXPECT_THROW(validate_bases(s), Error);
  s = "acgt";
  validate_bases(s);
  EXPECT_EQ(s, "ACGT");
  EXPECT_EQ(reverse_complement("AACGTT"), "AACGTT");
  EXPECT_EQ(reverse_complement("ACCG"), "CGGT");
  EXPECT_EQ(base_code('g'), 2);
  EXPECT_EQ(base_code('N'), -1);
}

TEST(Rng, StreamsAreReproducibleAndIndependent) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(42, 1), derive_seed(42, 2));
  EXPECT_NE(derive_seed(42, 1), derive_seed(43, 1));
  Rng c(7);
  for (int i = 0; i < 10'000; ++i) {
    const double u = c.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(c.below(13), 13u);
  }
}

// splitmix64 expansion and the xoshiro256** step written out independently.
TEST(Rng, MatchesDocumentedEquations) {
  std::uint64_t x = 123456789;
  std::uint64_t s[4];
  for (auto& w : s) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    w = z ^ (z >> 31);
  }
  auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
  Rng rng(123456789);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t expect = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    ASSERT_EQ(rng.next(), expect) << "draw " << i;
  }
}

}  // namespace
}  // namespace rawisp
