#include "rawisp/mapper.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rawisp {

FilterParams filters_for_genome(std::uint64_t genome_size) {
  return genome_size >= kLargeGenomeThreshold ? kLargeGenomeFilters : kSmallGenomeFilters;
}

std::vector<Seed> generate_seeds(const EventSequence& events, std::size_t n_events_per_seed,
                                 StepTrace* trace) {
  if (n_events_per_seed < kMinSeedEvents || n_events_per_seed > kMaxSeedEvents) {
    throw Error("n_events_per_seed must be in [2, 16]");
  }
  std::vector<Seed> seeds;
  const auto& ev = events.events;
  if (ev.size() >= n_events_per_seed) {
    const std::size_t windows = ev.size() - n_events_per_seed + 1;
    seeds.reserve(windows);
    for (std::size_t i = 0; i < windows; ++i) {
      seeds.push_back({static_cast<std::uint32_t>(i),
                       seed_hash(std::span(ev).subspan(i, n_events_per_seed), events.params.bucket_bits)});
    }
  }
  if (trace) {
    const std::uint64_t s = seeds.size();
    // pack: one rotate/xor per symbol; finaliser: 3 shift-xor, 2 multiplies
    trace->add(OpClass::add, s * (2 * n_events_per_seed + 3));
    trace->add(OpClass::multiply, 2 * s);
    trace->bytes_out += s * kSeedBytes;
    trace->work_items += s;
  }
  return seeds;
}

std::vector<Seed> frequency_filter(const ReferenceIndex& index, std::span<const Seed> seeds,
                                   std::uint32_t thresh_freq, StepTrace* trace) {
  std::vector<Seed> kept;
  kept.reserve(seeds.size());
  for (const Seed& s : seeds) {
    if (index.frequency(s.hash) <= thresh_freq) kept.push_back(s);
  }
  if (trace) {
    trace->add(OpClass::lookup, seeds.size());
    trace->add(OpClass::compare, seeds.size());
    trace->bytes_in += seeds.size() * kSeedBytes;
    trace->bytes_out += kept.size() * kSeedBytes;
    trace->work_items += seeds.size();
  }
  return kept;
}

std::vector<Anchor> collect_anchors(const ReferenceIndex& index, std::span<const Seed> seeds,
                                    StepTrace* trace) {
  std::vector<Anchor> anchors;
  for (const Seed& s : seeds) {
    for (std::uint32_t p : index.query(s.hash)) anchors.push_back({p, s.read_pos});
  }
  if (trace) {
    trace->add(OpClass::lookup, seeds.size());
    trace->add(OpClass::add, anchors.size());
    trace->bytes_in += seeds.size() * kSeedBytes;
    trace->bytes_out += anchors.size() * kAnchorBytes;
    trace->work_items += seeds.size();
  }
  return anchors;
}

std::vector<Anchor> seed_and_vote(std::span<const Anchor> anchors, std::uint64_t reference_length,
                                  const FilterParams& params, StepTrace* trace) {
  if (params.voting_window < 2) throw Error("voting_window must be >= 2");
  const std::uint64_t width = params.voting_window;
  const std::uint64_t stride = width / 2;
  const std::uint64_t n_windows = reference_length == 0 ? 0 : (reference_length - 1) / stride + 1;

  auto first_window = [&](std::uint64_t p) { return p + 1 >= width ? (p + 1 - width + stride - 1) / stride : 0; };
  auto last_window = [&](std::uint64_t p) { return std::min(p / stride, n_windows - 1); };

  // (window, read_pos) memberships, de-duplicated per window.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> votes;
  votes.reserve(anchors.size() * 2);
  for (const Anchor& a : anchors) {
    if (a.ref_pos >= reference_length) throw Error("seed_and_vote: anchor outside reference");
    for (std::uint64_t w = first_window(a.ref_pos); w <= last_window(a.ref_pos); ++w) {
      votes.emplace_back(w, a.read_pos);
    }
  }
  const std::uint64_t memberships = votes.size();
  std::sort(votes.begin(), votes.end());
  votes.erase(std::unique(votes.begin(), votes.end()), votes.end());

  std::vector<std::uint64_t> kept_windows;
  for (std::size_t i = 0; i < votes.size();) {
    std::size_t j = i;
    while (j < votes.size() && votes[j].first == votes[i].first) ++j;
    if (j - i >= params.thresh_voting) kept_windows.push_back(votes[i].first);
    i = j;
  }

  std::vector<Anchor> kept;
  kept.reserve(anchors.size());
  for (const Anchor& a : anchors) {
    for (std::uint64_t w = first_window(a.ref_pos); w <= last_window(a.ref_pos); ++w) {
      if (std::binary_search(kept_windows.begin(), kept_windows.end(), w)) {
        kept.push_back(a);
        break;
      }
    }
  }

  if (trace) {
    const std::uint64_t n = anchors.size();
    trace->add(OpClass::divide, n);                      // window index
    trace->add(OpClass::add, memberships);               // vote increments
    trace->add(OpClass::compare, memberships + votes.size() + n);  // de-dup, threshold, survival
    trace->bytes_in += n * kAnchorBytes;
    trace->bytes_out += kept.size() * kAnchorBytes;
    trace->work_items += n;
  }
  return kept;
}

std::int64_t gap_cost(const Anchor& from, const Anchor& to, std::int32_t events_to_bases) {
  const std::int64_t dref = static_cast<std::int64_t>(to.ref_pos) - from.ref_pos;
  const std::int64_t dread = static_cast<std::int64_t>(to.read_pos) - from.read_pos;
  const std::int64_t diff = dref * kScoreOne - dread * events_to_bases;
  return diff < 0 ? -diff : diff;
}

Chain chain(std::span<const Anchor> anchors, const ChainParams& params, StepTrace* trace) {
  Chain best;
  const std::size_t n = anchors.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (anchors[i] < anchors[i - 1]) {
      throw Error("chain: anchors not sorted by (ref_pos, read_pos) at index " + std::to_string(i));
    }
  }
  if (n == 0) return best;

  const std::int64_t weight = static_cast<std::int64_t>(params.weight) * kScoreOne;
  std::vector<std::int64_t> score(n);
  std::vector<std::int64_t> pred(n, -1);
  std::vector<std::uint32_t> start(n);   // ref_pos of the chain's first anchor
  std::vector<std::uint32_t> length(n);  // anchors in the chain
  std::uint64_t scanned = 0;

  // Candidate (value, start, length) ordering: higher value, then smaller start, then longer.
  auto better = [](std::int64_t v, std::uint32_t s, std::uint32_t l, std::int64_t bv, std::uint32_t bs,
                   std::uint32_t bl) {
    if (v != bv) return v > bv;
    if (s != bs) return s < bs;
    return l > bl;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const Anchor& a = anchors[i];
    std::int64_t best_val = 0;
    std::int64_t best_j = -1;
    std::uint32_t best_start = a.ref_pos;
    std::uint32_t best_len = 0;
    const std::size_t lo = i > params.max_skip ? i - params.max_skip : 0;
    for (std::size_t j = i; j-- > lo;) {
      const Anchor& b = anchors[j];
      ++scanned;
      if (a.ref_pos - b.ref_pos > params.max_gap) break;  // sorted by ref_pos
      if (b.ref_pos >= a.ref_pos || b.read_pos >= a.read_pos) continue;
      if (a.read_pos - b.read_pos > params.max_gap) continue;
      const std::int64_t val = score[j] - gap_cost(b, a, params.events_to_bases);
      if (better(val, start[j], length[j], best_val, best_start, best_len)) {
        best_val = val;
        best_j = static_cast<std::int64_t>(j);
        best_start = start[j];
        best_len = length[j];
      }
    }
    score[i] = weight + best_val;
    pred[i] = best_j;
    start[i] = best_start;
    length[i] = best_len + 1;
  }

  std::size_t end = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (better(score[i], start[i], length[i], score[end], start[end], length[end])) end = i;
  }
  for (std::int64_t i = static_cast<std::int64_t>(end); i >= 0; i = pred[static_cast<std::size_t>(i)]) {
    best.anchors.push_back(anchors[static_cast<std::size_t>(i)]);
  }
  std::reverse(best.anchors.begin(), best.anchors.end());
  best.score = score[end];
  best.ref_start = best.anchors.front().ref_pos;
  best.ref_end = best.anchors.back().ref_pos;

  if (trace) {
    trace->add(OpClass::add, 3 * scanned + n + best.anchors.size());
    trace->add(OpClass::compare, 4 * scanned + 2 * n);
    trace->add(OpClass::multiply, scanned);
  }
  return best;
}

std::int32_t estimate_events_to_bases(std::size_t samples, std::size_t events, double samples_per_base) {
  if (samples == 0 || events == 0 || !(samples_per_base > 0.0)) return static_cast<std::int32_t>(kScoreOne);
  const double ratio = static_cast<double>(samples) / samples_per_base / static_cast<double>(events);
  return static_cast<std::int32_t>(std::clamp(std::lround(ratio * kScoreOne), 1L, 64L * kScoreOne));
}

MappingResult map_read(const RawSignal& raw, const ReferenceIndex& index, const MapParams& params) {
  MappingResult result;
  result.read_id = raw.read_id;
  result.trace.reads = 1;
  result.trace.index_bytes = index.size_bytes();
  if (params.events.format != index.format()) {
    throw Error("map_read: fixed-point format differs from the index");
  }
  const std::size_t n = index.n_events_per_seed();
  if (raw.samples.size() < std::max(kMinSignalSamples, 2 * params.events.window)) return result;

  auto& tr = result.trace;
  EventParams ep = params.events;
  ep.merge_repeats = index.merged_repeats();
  const EventSequence events = signal_to_events(raw, index.quant().bucket_bits, ep,
                                                &tr[Step::quantize], &tr[Step::event_detect]);
  result.read_events = static_cast<std::uint32_t>(events.size());
  tr[Step::hash].bytes_in = tr[Step::event_detect].bytes_out;

  const auto seeds = generate_seeds(events, n, &tr[Step::hash]);
  const auto kept = frequency_filter(index, seeds, params.filters.thresh_freq, &tr[Step::freq_filter]);
  const auto anchors = collect_anchors(index, kept, &tr[Step::query]);
  const auto voted = seed_and_vote(anchors, index.reference_length(), params.filters, &tr[Step::vote]);

  auto& bucket_step = tr[Step::bucketize];
  bucket_step.add(OpClass::multiply, voted.size());
  bucket_step.add(OpClass::divide, voted.size());
  bucket_step.add(OpClass::add, voted.size());
  bucket_step.bytes_in = bucket_step.bytes_out = voted.size() * kAnchorBytes;
  bucket_step.work_items = voted.size();

  const auto sorted = sort_and_merge(voted, index.reference_length());
  tr.sort_buckets = sorted.bucket_stats;
  const SortStats total = sorted.total();
  auto& sort_step = tr[Step::sort];
  sort_step.add(OpClass::compare, total.comparators_fired + total.merge_steps);
  sort_step.bytes_in = sort_step.bytes_out = voted.size() * kAnchorBytes;
  sort_step.work_items = voted.size();

  ChainParams cp = params.chaining;
  cp.weight = static_cast<std::uint32_t>(n);
  if (params.samples_per_base > 0.0) {
    cp.events_to_bases = estimate_events_to_bases(raw.samples.size(), events.size(), params.samples_per_base);
  }
  auto& chain_step = tr[Step::chain];
  const Chain best = chain(sorted.sorted, cp, &chain_step);
  chain_step.bytes_in = voted.size() * kAnchorBytes;
  chain_step.bytes_out = kMappingRecordBytes;
  chain_step.work_items = 1;

  result.n_anchors_considered = static_cast<std::uint32_t>(voted.size());
  result.chain_anchors = static_cast<std::uint32_t>(best.anchors.size());
  result.score = best.score;
  const std::int64_t min_score = params.min_score > 0 ? params.min_score : kDefaultMinScoreWeights * static_cast<std::int64_t>(n) * kScoreOne;
  if (!best.anchors.empty() && best.score >= min_score) {
    result.status = MapStatus::mapped;
    result.ref_start = best.ref_start;
    result.ref_end = best.ref_end;
    const std::int64_t offset =
        static_cast<std::int64_t>(best.anchors.front().read_pos) * cp.events_to_bases / kScoreOne;
    result.ref_pos = static_cast<std::uint64_t>(std::max<std::int64_t>(0, best.ref_start - offset));
  }
  return result;
}

std::vector<MappingResult> map_reads(std::span<const RawSignal> reads, const ReferenceIndex& index,
                                     const MapParams& params, int threads) {
  std::vector<MappingResult> results(reads.size());
  const auto n = static_cast<std::int64_t>(reads.size());
  std::exception_ptr failure;
#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(team)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      results[static_cast<std::size_t>(i)] = map_read(reads[static_cast<std::size_t>(i)], index, params);
    } catch (...) {
#pragma omp critical(rawisp_map_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  (void)threads;
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<MappingResult> map_reads_serial(std::span<const RawSignal> reads,
                                            const ReferenceIndex& index, const MapParams& params) {
  std::vector<MappingResult> results;
  results.reserve(reads.size());
  for (const auto& r : reads) results.push_back(map_read(r, index, params));
  return results;
}

OperationTrace combine_traces(std::span<const MappingResult> results) {
  OperationTrace total;
  for (const auto& r : results) total += r.trace;
  return total;
}

MappingRecord to_record(const MappingResult& r, const std::string& ref_id) {
  MappingRecord rec;
  rec.read_id = r.read_id;
  rec.read_events = r.read_events;
  rec.status = r.status;
  rec.n_anchors = r.n_anchors_considered;
  if (r.status == MapStatus::mapped) {
    rec.ref_id = ref_id;
    rec.ref_start = r.ref_pos;
    rec.ref_end = r.ref_end;
    rec.score = static_cast<double>(r.score) / static_cast<double>(kScoreOne);
  } else {
    rec.ref_id = "*";
  }
  return rec;
}

void write_mappings(std::ostream& out, std::span<const MappingRecord> records) {
  for (const auto& r : records) {
    out << r.read_id << '\t' << r.read_events << '\t'
        << (r.status == MapStatus::mapped ? "mapped" : "unmapped") << '\t'
        << (r.ref_id.empty() ? std::string("*") : r.ref_id) << '\t'
        << r.ref_start << '\t' << r.ref_end << '\t' << r.n_anchors << '\t' << format_double(r.score)
        << '\n';
  }
}

void write_mappings(const std::string& path, std::span<const MappingRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  write_mappings(out, records);
  if (!out) throw IoError(path, "write failed");
}

std::vector<MappingRecord> read_mappings(std::istream& in) {
  std::vector<MappingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    MappingRecord r;
    std::string status, score;
    if (!(ss >> r.read_id >> r.read_events >> status >> r.ref_id >> r.ref_start >> r.ref_end >>
          r.n_anchors >> score)) {
      throw Error("mappings line " + std::to_string(line_no) + ": expected 8 columns");
    }
    if (status != "mapped" && status != "unmapped") {
      throw Error("mappings line " + std::to_string(line_no) + ": bad status '" + status + "'");
    }
    r.status = status == "mapped" ? MapStatus::mapped : MapStatus::unmapped;
    const auto res = std::from_chars(score.data(), score.data() + score.size(), r.score);
    if (res.ec != std::errc()) throw Error("mappings line " + std::to_string(line_no) + ": bad score");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MappingRecord> read_mappings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return read_mappings(in);
}

}  // namespace rawisp
