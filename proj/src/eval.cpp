#include "rawisp/eval.hpp"

#include <ostream>
#include <sstream>

#include "rawisp/io.hpp"

namespace rawisp {

ConfusionCounts classify(std::span<const MappingRecord> results,
                         const std::map<std::string, TruthOrigin>& truths,
                         std::uint64_t distance_threshold) {
  ConfusionCounts c;
  for (const auto& r : results) {
    const auto it = truths.find(r.read_id);
    if (it == truths.end()) continue;
    const TruthOrigin& t = it->second;
    if (r.status != MapStatus::mapped) {
      ++c.fn;
      continue;
    }
    const std::uint64_t dist = r.ref_start > t.position ? r.ref_start - t.position : t.position - r.ref_start;
    if (r.ref_id == t.reference_id && dist <= distance_threshold) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  return c;
}

std::map<std::string, TruthOrigin> truth_table(std::span<const RawSignal> reads) {
  std::map<std::string, TruthOrigin> table;
  for (const auto& r : reads) {
    if (r.truth) table.emplace(r.read_id, *r.truth);
  }
  return table;
}

AccuracyReport metrics(const ConfusionCounts& counts, std::uint64_t distance_threshold) {
  AccuracyReport rep;
  rep.counts = counts;
  rep.distance_threshold = distance_threshold;
  const auto tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) rep.precision = tp / static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) rep.recall = tp / static_cast<double>(counts.tp + counts.fn);
  if (rep.precision + rep.recall > 0.0) {
    rep.f1 = 2.0 * (rep.precision * rep.recall) / (rep.precision + rep.recall);
  }
  return rep;
}

void write_accuracy_tsv(std::ostream& out, const AccuracyReport& report) {
  out << "tp\tfp\tfn\tprecision\trecall\tf1\tdistance_threshold\n";
  out << report.counts.tp << '\t' << report.counts.fp << '\t' << report.counts.fn << '\t'
      << format_double(report.precision) << '\t' << format_double(report.recall) << '\t'
      << format_double(report.f1) << '\t' << report.distance_threshold << '\n';
}

std::string accuracy_summary(const AccuracyReport& report) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(4);
  ss << "precision=" << report.precision << " recall=" << report.recall << " f1=" << report.f1
     << " (tp=" << report.counts.tp << " fp=" << report.counts.fp << " fn=" << report.counts.fn
     << ", threshold=" << report.distance_threshold << ")";
  return ss.str();
}

}  // namespace rawisp
