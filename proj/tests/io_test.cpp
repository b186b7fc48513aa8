#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/io.hpp"
#include "rawisp/random.hpp"
#include "support/fixtures.hpp"

namespace rawisp {
namespace {

TEST(Fasta, RoundTripWrapsLongLines) {
  const std::vector<Sequence> recs{{"chr1", std::string(200, 'A') + "CGT"}, {"chr2", "ACGT"}};
  std::ostringstream out;
  write_fasta(out, recs);
  std::istringstream lines(out.str());
  std::string line;
  while (std::getline(lines, line)) EXPECT_LE(line.size(), 80u);
  std::istringstream in(out.str());
  const auto back = read_fasta(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, "chr1");
  EXPECT_EQ(back[0].bases, recs[0].bases);
  EXPECT_EQ(back[1].bases, "ACGT");
}

TEST(Fasta, LowercaseAcceptedInvalidRejected) {
  std::istringstream ok(">r desc\nacgt\nAC\n");
  const auto recs = read_fasta(ok);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "r");
  EXPECT_EQ(recs[0].bases, "ACGTAC");
  std::istringstream bad(">r\nACNT\n");
  EXPECT_THROW(read_fasta(bad), Error);
  std::istringstream headless("ACGT\n");
  EXPECT_THROW(read_fasta(headless), Error);
}

TEST(Signals, RoundTripIsExact) {
  Rng rng(5);
  std::vector<RawSignal> reads(3);
  for (std::size_t i = 0; i < reads.size(); ++i) {
    reads[i].read_id = "read_" + std::to_string(i);
    for (int k = 0; k < 100; ++k) reads[i].samples.push_back(rng.uniform(50.0, 150.0));
  }
  reads[0].truth = TruthOrigin{"ref", 1234, Strand::forward, 0};
  reads[1].truth = TruthOrigin{"ref", 7, Strand::reverse, 0};
  std::ostringstream out;
  write_signals(out, reads);
  std::istringstream in(out.str());
  const auto back = read_signals(in);
  ASSERT_EQ(back.size(), reads.size());
  for (std::size_t i = 0; i < reads.size(); ++i) {
    EXPECT_EQ(back[i].read_id, reads[i].read_id);
    EXPECT_EQ(back[i].samples, reads[i].samples);
    ASSERT_EQ(back[i].truth.has_value(), reads[i].truth.has_value());
    if (reads[i].truth) {
      EXPECT_EQ(back[i].truth->position, reads[i].truth->position);
      EXPECT_EQ(back[i].truth->strand, reads[i].truth->strand);
      EXPECT_EQ(back[i].truth->reference_id, "ref");
    }
  }
}

TEST(Signals, MalformedInputRejected) {
  std::istringstream no_header("1 2 3\n");
  EXPECT_THROW(read_signals(no_header), Error);
  std::istringstream bad_strand("#read r ref 5 x\n1 2 3\n");
  EXPECT_THROW(read_signals(bad_strand), Error);
  std::istringstream bad_number("#read r . . +\n1 two 3\n");
  EXPECT_THROW(read_signals(bad_number), Error);
}

TEST(PoreModelFile, RoundTrip) {
  testing::TempDir dir;
  const PoreModel m = synth_pore_model(3, 11);
  save_pore_model(dir.file("m.tsv"), m);
  EXPECT_EQ(load_pore_model(dir.file("m.tsv")), m);
}

TEST(Files, MissingFileIsIoErrorNamingPath) {
  try {
    read_signals("/nonexistent/dir/reads.sig");
    FAIL() << "expected an error";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/dir/reads.sig");
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/reads.sig"), std::string::npos);
  }
}

TEST(Files, Crc32MatchesStandardCheckValue) {
  testing::TempDir dir;
  std::ofstream(dir.file("c.txt"), std::ios::binary) << "123456789";
  EXPECT_EQ(file_crc32(dir.file("c.txt")), 0xCBF43926u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(80.0), "80");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-1e6, 1e6);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

}  // namespace
}  // namespace rawisp
