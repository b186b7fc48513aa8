#include "rawisp/io.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "rawisp/error.hpp"

namespace rawisp {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw Error(context + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& context) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw Error(context + ": bad integer '" + s + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<Sequence> read_fasta(std::istream& in) {
  std::vector<Sequence> records;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '>') {
      const auto fields = split_ws(line.substr(1));
      records.push_back({fields.empty() ? std::string() : fields[0], {}});
      continue;
    }
    if (records.empty()) throw Error("FASTA: sequence data before first header");
    records.back().bases += line;
  }
  for (auto& r : records) {
    try {
      validate_bases(r.bases);
    } catch (const Error& e) {
      throw Error("FASTA record '" + r.id + "': " + e.what());
    }
  }
  return records;
}

std::vector<Sequence> read_fasta(const std::string& path) {
  auto in = open_in(path);
  return read_fasta(in);
}

void write_fasta(std::ostream& out, const std::vector<Sequence>& records) {
  constexpr std::size_t kWidth = 80;
  for (const auto& r : records) {
    out << '>' << r.id << '\n';
    for (std::size_t i = 0; i < r.bases.size(); i += kWidth) {
      out.write(r.bases.data() + i, static_cast<std::streamsize>(std::min(kWidth, r.bases.size() - i)));
      out << '\n';
    }
  }
}

void write_fasta(const std::string& path, const std::vector<Sequence>& records) {
  auto out = open_out(path);
  write_fasta(out, records);
  if (!out) throw IoError(path, "write failed");
}

PoreModel load_pore_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  int col_kmer = -1, col_mean = -1, col_stdv = -1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto header = split_tabs(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "kmer") col_kmer = static_cast<int>(i);
      if (header[i] == "level_mean") col_mean = static_cast<int>(i);
      if (header[i] == "level_stdv") col_stdv = static_cast<int>(i);
    }
    break;
  }
  if (col_kmer < 0 || col_mean < 0 || col_stdv < 0) {
    throw Error("pore model: header must name kmer, level_mean and level_stdv columns");
  }
  const auto needed = static_cast<std::size_t>(std::max({col_kmer, col_mean, col_stdv}));

  int k = 0;
  std::map<std::uint32_t, PoreLevel> rows;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "pore model line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() <= needed) throw Error(where + ": malformed row");
    const std::string& kmer = fields[static_cast<std::size_t>(col_kmer)];
    if (k == 0) {
      k = static_cast<int>(kmer.size());
      if (k < 1 || k > 12) throw Error(where + ": unsupported k-mer length");
    } else if (static_cast<int>(kmer.size()) != k) {
      throw Error(where + ": inconsistent k-mer length");
    }
    std::uint32_t code = 0;
    for (char c : kmer) {
      const int b = base_code(c);
      if (b < 0) throw Error(where + ": malformed row (bad k-mer '" + kmer + "')");
      code = (code << 2) | static_cast<std::uint32_t>(b);
    }
    PoreLevel lvl{parse_double(fields[static_cast<std::size_t>(col_mean)], where),
                  parse_double(fields[static_cast<std::size_t>(col_stdv)], where)};
    if (!rows.emplace(code, lvl).second) throw Error(where + ": duplicate k-mer " + kmer);
  }
  if (k == 0) throw Error("pore model: no rows");
  const std::size_t expected = std::size_t{1} << (2 * k);
  if (rows.size() != expected) {
    throw Error("pore model: incomplete table: expected " + std::to_string(expected) + " rows, got " +
                std::to_string(rows.size()));
  }
  std::vector<PoreLevel> levels;
  levels.reserve(expected);
  for (const auto& [code, lvl] : rows) levels.push_back(lvl);
  return PoreModel(k, std::move(levels));
}

PoreModel load_pore_model(const std::string& path) {
  auto in = open_in(path);
  try {
    return load_pore_model(in);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void save_pore_model(std::ostream& out, const PoreModel& model) {
  static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
  out << "kmer\tlevel_mean\tlevel_stdv\n";
  const int k = model.k();
  std::string kmer(static_cast<std::size_t>(k), 'A');
  for (std::uint32_t code = 0; code < model.size(); ++code) {
    for (int i = 0; i < k; ++i) kmer[static_cast<std::size_t>(k - 1 - i)] = kBases[(code >> (2 * i)) & 3u];
    const auto& lvl = model.level(code);
    out << kmer << '\t' << format_double(lvl.mean) << '\t' << format_double(lvl.stdv) << '\n';
  }
}

void save_pore_model(const std::string& path, const PoreModel& model) {
  auto out = open_out(path);
  save_pore_model(out, model);
  if (!out) throw IoError(path, "write failed");
}

std::vector<RawSignal> read_signals(std::istream& in) {
  std::vector<RawSignal> reads;
  std::string line;
  std::size_t line_no = 0;
  bool expect_samples = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const std::string where = "signals line " + std::to_string(line_no);
    if (line.rfind("#read", 0) == 0) {
      const auto f = split_ws(line);
      if (f.size() != 5) throw Error(where + ": header needs id, truth_ref, truth_pos, strand");
      RawSignal sig;
      sig.read_id = f[1];
      if (f[2] != ".") {
        TruthOrigin t;
        t.reference_id = f[2];
        t.position = parse_u64(f[3], where);
        if (f[4] != "+" && f[4] != "-") throw Error(where + ": strand must be + or -");
        t.strand = f[4] == "+" ? Strand::forward : Strand::reverse;
        sig.truth = t;
      }
      reads.push_back(std::move(sig));
      expect_samples = true;
      continue;
    }
    if (line.empty()) continue;
    if (!expect_samples || reads.empty()) throw Error(where + ": samples without #read header");
    for (const auto& tok : split_ws(line)) reads.back().samples.push_back(parse_double(tok, where));
  }
  for (const auto& r : reads) {
    if (r.samples.empty()) throw Error("signals: read '" + r.read_id + "' has no samples");
  }
  return reads;
}

std::vector<RawSignal> read_signals(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_signals(in);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_signals(std::ostream& out, const std::vector<RawSignal>& reads) {
  for (const auto& r : reads) {
    out << "#read " << r.read_id << ' ';
    if (r.truth) {
      out << r.truth->reference_id << ' ' << r.truth->position << ' '
          << (r.truth->strand == Strand::forward ? '+' : '-');
    } else {
      out << ". . .";
    }
    out << '\n';
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      if (i) out << ' ';
      out << format_double(r.samples[i]);
    }
    out << '\n';
  }
}

void write_signals(const std::string& path, const std::vector<RawSignal>& reads) {
  auto out = open_out(path);
  write_signals(out, reads);
  if (!out) throw IoError(path, "write failed");
}

std::uint32_t file_crc32(const std::string& path) {
  auto in = open_in(path);
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(got));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace rawisp
