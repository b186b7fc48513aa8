#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rawisp/mapper.hpp"
#include "rawisp/signal_model.hpp"

namespace rawisp {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct AccuracyReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  std::uint64_t distance_threshold = 0;
};

inline constexpr std::uint64_t kDefaultDistanceThreshold = 256;

// Mapped within `distance_threshold` bases of the truth start on the same
// reference -> TP, mapped elsewhere -> FP, unmapped -> FN. Records without a
// truth entry are skipped.
ConfusionCounts classify(std::span<const MappingRecord> results,
                         const std::map<std::string, TruthOrigin>& truths,
                         std::uint64_t distance_threshold = kDefaultDistanceThreshold);

std::map<std::string, TruthOrigin> truth_table(std::span<const RawSignal> reads);

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); each 0 when its denominator is 0.
AccuracyReport metrics(const ConfusionCounts& counts, std::uint64_t distance_threshold = kDefaultDistanceThreshold);

void write_accuracy_tsv(std::ostream& out, const AccuracyReport& report);
std::string accuracy_summary(const AccuracyReport& report);

}  // namespace rawisp
