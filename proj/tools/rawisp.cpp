// rawisp: generate synthetic data, index, map, evaluate and simulate.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/eval.hpp"
#include "rawisp/io.hpp"
#include "rawisp/isp_sim.hpp"
#include "rawisp/mapper.hpp"
#include "rawisp/random.hpp"
#include "rawisp/reference_index.hpp"
#include "rawisp/signal_model.hpp"

namespace fs = std::filesystem;
using namespace rawisp;

namespace {

constexpr int kExitError = 1;
constexpr int kExitMissingFile = 2;

struct Global {
  std::uint64_t seed = 1;
  std::string config;
  int threads = 0;
  std::string arithmetic = "fixed";
};

struct GenOpts {
  std::string preset = "d1-like";
  std::string out_dir;
  std::uint64_t reads = 0;
  std::uint64_t genome_size = 0;
  double repeat_fraction = 0.0;
  double noise = 2.0;
  int kmer = 6;
  std::string dwell = "geometric";
  double samples_per_base = 10.0;
  bool reverse_strand = false;
};

struct IndexOpts {
  std::string reference;
  std::string pore_model;
  std::string out;
  std::size_t seed_events = 6;
  int bucket_bits = 4;
  int fractional_bits = 8;
  bool no_merge = false;
};

struct MapOpts {
  std::string index;
  std::string signals;
  std::string out;
  std::string trace;
  std::string filters = "auto";
  std::optional<std::uint32_t> thresh_freq;
  std::optional<std::uint32_t> thresh_voting;
  std::optional<std::uint32_t> voting_window;
  std::size_t window = 6;
  double threshold = 4.0;
  std::size_t min_event_length = 3;
  std::optional<double> min_score;
  double samples_per_base = 10.0;
};

struct EvalOpts {
  std::string mappings;
  std::string signals;
  std::string out;
  std::uint64_t distance = kDefaultDistanceThreshold;
};

struct SimOpts {
  std::string trace;
  std::vector<std::string> systems;
  std::string out;
  std::uint32_t dram_scale = 1;
  bool mode_switch = false;
};

struct ReportOpts {
  std::string costs;
  std::string accuracy;
  std::string baseline = "MARS-External";
};

HardwareConfig hardware(const Global& g) {
  return g.config.empty() ? HardwareConfig{} : load_hardware_config(g.config);
}

Arithmetic arithmetic(const Global& g) {
  return g.arithmetic == "float" ? Arithmetic::floating : Arithmetic::fixed;
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

int cmd_gen(const Global& g, const GenOpts& o) {
  DatasetPreset preset = find_preset(o.preset);
  if (o.reads) preset.read_count = o.reads;
  if (o.genome_size) preset.genome_size = o.genome_size;

  const std::uint64_t model_seed = derive_seed(g.seed, 1);
  const std::uint64_t ref_seed = derive_seed(g.seed, 2);
  const std::uint64_t read_seed = derive_seed(g.seed, 3);

  const PoreModel model = synth_pore_model(o.kmer, model_seed);
  const Sequence ref = generate_reference(preset.genome_size, o.repeat_fraction, ref_seed, "ref");
  ReadSetParams rp;
  rp.signal.noise_std = o.noise;
  rp.signal.samples_per_event_mean = o.samples_per_base;
  rp.signal.dwell = o.dwell == "fixed" ? DwellModel::fixed : DwellModel::geometric;
  rp.reverse_strand = o.reverse_strand;
  const auto reads = generate_read_set(ref, preset, model, rp, read_seed);

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  const std::string ref_path = (dir / "reference.fa").string();
  const std::string model_path = (dir / "pore_model.tsv").string();
  const std::string sig_path = (dir / "reads.sig").string();
  write_fasta(ref_path, {ref});
  save_pore_model(model_path, model);
  write_signals(sig_path, reads);

  std::ostringstream manifest;
  manifest << "preset\t" << preset.name << '\n'
           << "seed\t" << g.seed << '\n'
           << "pore_model_seed\t" << model_seed << '\n'
           << "reference_seed\t" << ref_seed << '\n'
           << "reads_seed\t" << read_seed << '\n'
           << "genome_size\t" << preset.genome_size << '\n'
           << "reads\t" << reads.size() << '\n'
           << "noise_std\t" << format_double(o.noise) << '\n'
           << "repeat_fraction\t" << format_double(o.repeat_fraction) << '\n';
  for (const auto& p : {ref_path, model_path, sig_path}) {
    manifest << "file\t" << fs::path(p).filename().string() << '\t' << hex32(file_crc32(p)) << '\n';
  }
  std::ofstream(dir / "manifest.tsv") << manifest.str();
  std::cout << manifest.str();
  return 0;
}

int cmd_index(const Global&, const IndexOpts& o) {
  const auto records = read_fasta(o.reference);
  if (records.size() != 1) {
    throw Error(o.reference + ": expected exactly one reference record, found " + std::to_string(records.size()));
  }
  const PoreModel model = load_pore_model(o.pore_model);
  IndexParams ip;
  ip.bucket_bits = o.bucket_bits;
  ip.n_events_per_seed = o.seed_events;
  ip.format.fractional_bits = o.fractional_bits;
  ip.merge_repeats = !o.no_merge;
  const ReferenceIndex idx = index_reference(records.front(), model, ip);
  idx.save(o.out);
  std::cout << "reference\t" << idx.reference_name() << '\n'
            << "reference_length\t" << idx.reference_length() << '\n'
            << "distinct_hashes\t" << idx.distinct_hashes() << '\n'
            << "positions\t" << idx.total_positions() << '\n'
            << "size_bytes\t" << idx.size_bytes() << '\n';
  return 0;
}

int cmd_map(const Global& g, const MapOpts& o) {
  const ReferenceIndex idx = ReferenceIndex::load(o.index);
  const auto reads = read_signals(o.signals);

  MapParams mp;
  mp.events.window = o.window;
  mp.events.threshold_t = o.threshold;
  mp.events.min_event_length = o.min_event_length;
  mp.events.format = idx.format();
  mp.events.arithmetic = arithmetic(g);
  if (o.filters == "auto") {
    mp.filters = filters_for_genome(idx.reference_length());
  } else if (o.filters == "small") {
    mp.filters = kSmallGenomeFilters;
  } else if (o.filters == "large") {
    mp.filters = kLargeGenomeFilters;
  } else {
    mp.filters = kFiltersDisabled;
  }
  if (o.thresh_freq) mp.filters.thresh_freq = *o.thresh_freq;
  if (o.thresh_voting) mp.filters.thresh_voting = *o.thresh_voting;
  if (o.voting_window) mp.filters.voting_window = *o.voting_window;
  if (o.min_score) mp.min_score = static_cast<std::int64_t>(*o.min_score * kScoreOne);
  mp.samples_per_base = o.samples_per_base;

  const auto results = map_reads(reads, idx, mp, g.threads);
  std::vector<MappingRecord> records;
  records.reserve(results.size());
  std::size_t mapped = 0;
  for (const auto& r : results) {
    records.push_back(to_record(r, idx.reference_name()));
    mapped += r.status == MapStatus::mapped;
  }
  write_mappings(o.out, records);
  write_trace(o.trace, combine_traces(results));
  std::cerr << "mapped " << mapped << " of " << results.size() << " reads\n";
  return 0;
}

int cmd_eval(const Global&, const EvalOpts& o) {
  const auto records = read_mappings(o.mappings);
  const auto truths = truth_table(read_signals(o.signals));
  const AccuracyReport rep = metrics(classify(records, truths, o.distance), o.distance);
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw IoError(o.out, "cannot open for writing");
    write_accuracy_tsv(out, rep);
  } else {
    write_accuracy_tsv(std::cout, rep);
  }
  std::cerr << accuracy_summary(rep) << '\n';
  return 0;
}

int cmd_simulate(const Global& g, const SimOpts& o) {
  const OperationTrace trace = read_trace(o.trace);
  HardwareConfig hw = hardware(g);
  if (o.dram_scale > 1) hw = scale_dram(hw, o.dram_scale);

  std::vector<System> systems;
  if (o.systems.empty()) {
    systems.assign(kAllSystems.begin(), kAllSystems.end());
  } else {
    for (const auto& s : o.systems) systems.push_back(system_from_name(s));
  }
  const std::uint64_t result_bytes = trace[Step::chain].bytes_out;
  std::vector<CostReport> reports;
  for (System s : systems) {
    CostReport rep = simulate(trace, s, hw);
    if (o.mode_switch) {
      ModeState st = mode_switch({}, NvmeCommand::mars_init, hw);
      mode_switch(st, NvmeCommand::mars_write, hw, result_bytes, &rep);
    }
    reports.push_back(std::move(rep));
  }
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw IoError(o.out, "cannot open for writing");
    write_report_tsv(out, reports);
  } else {
    write_report_tsv(std::cout, reports);
  }
  for (const auto& r : reports) std::cerr << report_summary(r) << '\n';
  return 0;
}

int cmd_report(const Global&, const ReportOpts& o) {
  const auto totals = read_report_totals(o.costs);
  const ReportTotal* base = nullptr;
  for (const auto& t : totals) {
    if (t.system == o.baseline) base = &t;
  }
  std::cout << "system\tlatency_s\tenergy_j\tbytes_moved\tspeedup_vs_" << o.baseline << "\tenergy_gain_vs_"
            << o.baseline << '\n';
  for (const auto& t : totals) {
    std::cout << t.system << '\t' << format_double(t.latency_s) << '\t' << format_double(t.energy_j) << '\t'
              << t.bytes_moved << '\t';
    if (base && t.latency_s > 0.0 && t.energy_j > 0.0) {
      std::cout << format_double(base->latency_s / t.latency_s) << '\t' << format_double(base->energy_j / t.energy_j);
    } else {
      std::cout << "NA\tNA";
    }
    std::cout << '\n';
  }
  if (!o.accuracy.empty()) {
    std::ifstream in(o.accuracy);
    if (!in) throw IoError(o.accuracy, "cannot open for reading");
    std::cout << '\n' << in.rdbuf();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raw nanopore signal mapping with an in-storage cost model"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Seed for all randomness")->capture_default_str();
  app.add_option("--config", g.config, "Hardware config file (INI); built-in defaults if omitted");
  app.add_option("--threads", g.threads, "Mapping threads, 0 = OpenMP default")->capture_default_str();
  app.add_option("--arithmetic", g.arithmetic, "Event pipeline arithmetic")
      ->check(CLI::IsMember({"fixed", "float"}))
      ->capture_default_str();

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "Write a synthetic reference, pore model and read signals");
  c_gen->add_option("--preset", gen.preset, "Dataset preset (d1-like .. d5-like)")->capture_default_str();
  c_gen->add_option("--out-dir", gen.out_dir, "Output directory")->required();
  c_gen->add_option("--reads", gen.reads, "Read count, 0 = preset value");
  c_gen->add_option("--genome-size", gen.genome_size, "Genome length, 0 = preset value");
  c_gen->add_option("--repeat-fraction", gen.repeat_fraction, "Share of the genome made of one repeated motif")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();
  c_gen->add_option("--noise", gen.noise, "Gaussian noise std-dev (pA)")->capture_default_str();
  c_gen->add_option("--kmer", gen.kmer, "Pore model k")->check(CLI::Range(1, 8))->capture_default_str();
  c_gen->add_option("--dwell", gen.dwell, "Dwell-time model")
      ->check(CLI::IsMember({"geometric", "fixed"}))
      ->capture_default_str();
  c_gen->add_option("--samples-per-base", gen.samples_per_base, "Mean samples per k-mer")->capture_default_str();
  c_gen->add_flag("--reverse-strand", gen.reverse_strand, "Draw half the reads from the reverse strand");

  IndexOpts idx;
  auto* c_index = app.add_subcommand("index", "Build the seed index of a reference");
  c_index->add_option("--reference", idx.reference, "Reference FASTA (one record)")->required();
  c_index->add_option("--pore-model", idx.pore_model, "Pore model TSV")->required();
  c_index->add_option("--out", idx.out, "Index file to write")->required();
  c_index->add_option("--seed-events", idx.seed_events, "Events per seed")->capture_default_str();
  c_index->add_option("--bucket-bits", idx.bucket_bits, "Quantisation bits per event")->capture_default_str();
  c_index->add_option("--fractional-bits", idx.fractional_bits, "Fixed-point fractional bits")->capture_default_str();
  c_index->add_flag("--no-merge-repeats", idx.no_merge, "Keep adjacent events that share a symbol");

  MapOpts map;
  auto* c_map = app.add_subcommand("map", "Map read signals; writes mappings and an operation trace");
  c_map->add_option("--index", map.index, "Index file")->required();
  c_map->add_option("--signals", map.signals, "Read signal file")->required();
  c_map->add_option("--out", map.out, "Mappings TSV to write")->required();
  c_map->add_option("--trace", map.trace, "Operation trace TSV to write")->required();
  c_map->add_option("--filters", map.filters, "Filter preset; auto picks by genome size")
      ->check(CLI::IsMember({"auto", "small", "large", "off"}))
      ->capture_default_str();
  c_map->add_option("--thresh-freq", map.thresh_freq, "Override: max seed frequency");
  c_map->add_option("--thresh-voting", map.thresh_voting, "Override: min votes per window");
  c_map->add_option("--voting-window", map.voting_window, "Override: voting window (bases)");
  c_map->add_option("--window", map.window, "Segmentation window (samples)")->capture_default_str();
  c_map->add_option("--threshold", map.threshold, "Segmentation t-statistic threshold")->capture_default_str();
  c_map->add_option("--min-event-length", map.min_event_length, "Shortest event (samples)")->capture_default_str();
  c_map->add_option("--min-score", map.min_score, "Chain score needed to map, default 8 x events per seed");
  c_map->add_option("--samples-per-base", map.samples_per_base, "Translocation rate; 0 = 1 base per event")
      ->capture_default_str();

  EvalOpts ev;
  auto* c_eval = app.add_subcommand("eval", "Score mappings against the truth in a signal file");
  c_eval->add_option("--mappings", ev.mappings, "Mappings TSV")->required();
  c_eval->add_option("--signals", ev.signals, "Signal file with truth records")->required();
  c_eval->add_option("--out", ev.out, "Accuracy TSV to write (stdout if omitted)");
  c_eval->add_option("--distance-threshold", ev.distance, "Max start offset counted as correct (bases)")
      ->capture_default_str();

  SimOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Cost a trace on the storage placements");
  c_sim->add_option("--trace", sim.trace, "Operation trace TSV")->required();
  c_sim->add_option("--system", sim.systems, "MARS, MS-SmartSSD, MARS-External or MARS-BitSerial; repeatable, all if omitted");
  c_sim->add_option("--out", sim.out, "Cost report TSV (stdout if omitted)");
  c_sim->add_option("--dram-scale", sim.dram_scale, "Multiply DRAM capacity")->check(CLI::Range(1u, 64u))
      ->capture_default_str();
  c_sim->add_flag("--mode-switch", sim.mode_switch, "Bracket the run with MARS_Init/MARS_Write and cost the result write");

  ReportOpts rep;
  auto* c_report = app.add_subcommand("report", "Summarise a cost report, optionally with an accuracy TSV");
  c_report->add_option("--costs", rep.costs, "Cost report TSV")->required();
  c_report->add_option("--accuracy", rep.accuracy, "Accuracy TSV to append");
  c_report->add_option("--baseline", rep.baseline, "System the ratios are relative to")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*c_gen) return cmd_gen(g, gen);
    if (*c_index) return cmd_index(g, idx);
    if (*c_map) return cmd_map(g, map);
    if (*c_eval) return cmd_eval(g, ev);
    if (*c_sim) return cmd_simulate(g, sim);
    if (*c_report) return cmd_report(g, rep);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fs::exists(e.path()) ? kExitError : kExitMissingFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
