#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rawisp/signal_model.hpp"

namespace rawisp {

// FASTA, single or multi record. Sequence lines are wrapped at 80 columns on write.
std::vector<Sequence> read_fasta(const std::string& path);
std::vector<Sequence> read_fasta(std::istream& in);
void write_fasta(const std::string& path, const std::vector<Sequence>& records);
void write_fasta(std::ostream& out, const std::vector<Sequence>& records);

// Pore model TSV: header row naming kmer, level_mean and level_stdv columns
// (other columns ignored), one row per k-mer.
PoreModel load_pore_model(const std::string& path);
PoreModel load_pore_model(std::istream& in);
void save_pore_model(const std::string& path, const PoreModel& model);
void save_pore_model(std::ostream& out, const PoreModel& model);

// Raw-signal container. Each read is a header line
//   #read <id> <truth_ref> <truth_pos> <strand>
// followed by one line of whitespace-separated decimal samples. Reads without
// ground truth carry "." in the three truth fields; strand is '+' or '-'.
std::vector<RawSignal> read_signals(const std::string& path);
std::vector<RawSignal> read_signals(std::istream& in);
void write_signals(const std::string& path, const std::vector<RawSignal>& reads);
void write_signals(std::ostream& out, const std::vector<RawSignal>& reads);

// CRC-32 (zlib polynomial) of a file's bytes.
std::uint32_t file_crc32(const std::string& path);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace rawisp
