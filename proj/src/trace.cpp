#include "rawisp/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "rawisp/error.hpp"

namespace rawisp {

namespace {

constexpr std::array<std::string_view, kStepCount> kStepLabels = {"1b", "1a", "2c", "2d", "2e",
                                                                  "2f", "3g", "3h", "3i"};
constexpr std::array<std::string_view, kOpClassCount> kOpNames = {"add", "compare", "multiply",
                                                                  "divide", "lookup"};

struct SortField {
  std::string_view name;
  std::uint64_t SortStats::*member;
};
constexpr std::array<SortField, 7> kSortFields = {{
    {"comparators", &SortStats::comparators_fired},
    {"sentinel_comparators", &SortStats::sentinel_comparators},
    {"network_stages", &SortStats::network_stages},
    {"merge_steps", &SortStats::merge_steps},
    {"elements", &SortStats::elements},
    {"blocks", &SortStats::blocks},
    {"merges", &SortStats::merges},
}};

std::uint64_t parse_u64(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("trace line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view step_label(Step s) { return kStepLabels[static_cast<std::size_t>(s)]; }

std::optional<Step> step_from_label(std::string_view label) {
  for (std::size_t i = 0; i < kStepCount; ++i) {
    if (kStepLabels[i] == label) return static_cast<Step>(i);
  }
  return std::nullopt;
}

std::string_view op_class_name(OpClass c) { return kOpNames[static_cast<std::size_t>(c)]; }

std::optional<OpClass> op_class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpClassCount; ++i) {
    if (kOpNames[i] == name) return static_cast<OpClass>(i);
  }
  return std::nullopt;
}

StepTrace& StepTrace::operator+=(const StepTrace& o) {
  for (std::size_t i = 0; i < kOpClassCount; ++i) ops[i] += o.ops[i];
  bytes_in += o.bytes_in;
  bytes_out += o.bytes_out;
  work_items += o.work_items;
  return *this;
}

OperationTrace& OperationTrace::operator+=(const OperationTrace& o) {
  for (std::size_t i = 0; i < kStepCount; ++i) steps[i] += o.steps[i];
  for (std::size_t b = 0; b < kBucketCount; ++b) sort_buckets[b] += o.sort_buckets[b];
  reads += o.reads;
  index_bytes = std::max(index_bytes, o.index_bytes);
  return *this;
}

bool OperationTrace::conserves_bytes() const {
  for (std::size_t i = 0; i + 1 < kStepCount; ++i) {
    if (steps[i].bytes_out != steps[i + 1].bytes_in) return false;
  }
  return true;
}

bool OperationTrace::empty() const {
  for (const auto& s : steps) {
    if (s != StepTrace{}) return false;
  }
  for (const auto& b : sort_buckets) {
    if (b != SortStats{}) return false;
  }
  return true;
}

void write_trace(std::ostream& out, const OperationTrace& trace) {
  out << "step\top_class\tcount\tbytes\n";
  out << "meta\treads\t" << trace.reads << "\t0\n";
  out << "meta\tindex\t0\t" << trace.index_bytes << '\n';
  for (std::size_t i = 0; i < kStepCount; ++i) {
    const auto& s = trace.steps[i];
    const auto label = kStepLabels[i];
    for (std::size_t c = 0; c < kOpClassCount; ++c) {
      out << label << '\t' << kOpNames[c] << '\t' << s.ops[c] << "\t0\n";
    }
    out << label << "\tio_in\t0\t" << s.bytes_in << '\n';
    out << label << "\tio_out\t0\t" << s.bytes_out << '\n';
    out << label << "\twork_items\t" << s.work_items << "\t0\n";
  }
  for (std::size_t b = 0; b < kBucketCount; ++b) {
    for (const auto& f : kSortFields) {
      out << "3h/b" << b << '\t' << f.name << '\t' << trace.sort_buckets[b].*f.member << "\t0\n";
    }
  }
}

void write_trace(const std::string& path, const OperationTrace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  write_trace(out, trace);
  if (!out) throw IoError(path, "write failed");
}

OperationTrace read_trace(std::istream& in) {
  OperationTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto tab = rest.find('\t');
      f.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (!header_seen) {
      if (f.size() != 4 || f[0] != "step") throw Error("trace: missing header row");
      header_seen = true;
      continue;
    }
    const std::string where = "trace line " + std::to_string(line_no);
    if (f.size() != 4) throw Error(where + ": expected 4 columns");
    const std::uint64_t count = parse_u64(f[2], line_no);
    const std::uint64_t bytes = parse_u64(f[3], line_no);

    if (f[0] == "meta") {
      if (f[1] == "reads") trace.reads = count;
      else if (f[1] == "index") trace.index_bytes = bytes;
      else throw Error(where + ": unknown meta key '" + std::string(f[1]) + "'");
      continue;
    }
    if (f[0].starts_with("3h/b")) {
      const auto b = parse_u64(f[0].substr(4), line_no);
      if (b >= kBucketCount) throw Error(where + ": bucket out of range");
      bool known = false;
      for (const auto& sf : kSortFields) {
        if (sf.name == f[1]) {
          trace.sort_buckets[b].*sf.member = count;
          known = true;
        }
      }
      if (!known) throw Error(where + ": unknown sorter field '" + std::string(f[1]) + "'");
      continue;
    }
    const auto step = step_from_label(f[0]);
    if (!step) throw Error(where + ": unknown step '" + std::string(f[0]) + "'");
    auto& s = trace[*step];
    if (f[1] == "io_in") s.bytes_in = bytes;
    else if (f[1] == "io_out") s.bytes_out = bytes;
    else if (f[1] == "work_items") s.work_items = count;
    else if (const auto op = op_class_from_name(f[1])) s.ops[static_cast<std::size_t>(*op)] = count;
    else throw Error(where + ": unknown op class '" + std::string(f[1]) + "'");
  }
  if (!header_seen) throw Error("trace: empty file");
  return trace;
}

OperationTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return read_trace(in);
}

}  // namespace rawisp
