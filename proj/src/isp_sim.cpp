#include "rawisp/isp_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/io.hpp"

namespace rawisp {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return a == 0 ? 0 : (a - 1) / b + 1; }

// Minimum makespan of the bucket loads over `units` identical units (exact;
// there are only 8 buckets).
std::uint64_t min_makespan(const std::array<std::uint64_t, kBucketCount>& load, std::uint32_t units) {
  constexpr std::size_t kMasks = std::size_t{1} << kBucketCount;
  std::array<std::uint64_t, kMasks> sum{};
  for (std::size_t m = 1; m < kMasks; ++m) {
    const auto low = static_cast<std::size_t>(std::countr_zero(m));
    sum[m] = sum[m & (m - 1)] + load[low];
  }
  if (units >= kBucketCount) return *std::max_element(load.begin(), load.end());
  // best[m]: makespan of mask m on the units placed so far.
  std::array<std::uint64_t, kMasks> best = sum;
  for (std::uint32_t u = 2; u <= units; ++u) {
    std::array<std::uint64_t, kMasks> next = best;
    for (std::size_t m = 1; m < kMasks; ++m) {
      // the new unit takes submask s
      for (std::size_t s = m; s; s = (s - 1) & m) {
        next[m] = std::min(next[m], std::max(sum[s], best[m & ~s]));
      }
    }
    best = next;
  }
  return best[kMasks - 1];
}

}  // namespace

std::string_view hop_name(Hop h) {
  switch (h) {
    case Hop::flash_channel: return "flash_channel";
    case Hop::dram_bus: return "dram_bus";
    case Hop::fpga_link: return "fpga_link";
    case Hop::external_link: return "external_link";
  }
  return "?";
}

double io_time(std::uint64_t bytes, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error("io_time: bandwidth must be > 0");
  return static_cast<double>(bytes) / bandwidth;
}

double flash_read_time(std::uint64_t bytes, const SsdConfig& ssd) {
  const std::uint64_t pages = ceil_div(bytes, ssd.page_size);
  if (pages == 0) return 0.0;
  const std::uint64_t busiest = ceil_div(pages, ssd.channels);
  const double xfer = io_time(ssd.page_size, ssd.flash_channel_bw);
  const double per_page = std::max(ssd.t_read_page / ssd.chips_per_channel, xfer);
  return ssd.t_dma + ssd.t_read_page + xfer + static_cast<double>(busiest - 1) * per_page;
}

double flash_write_time(std::uint64_t bytes, const SsdConfig& ssd) {
  const std::uint64_t pages = ceil_div(bytes, ssd.page_size);
  if (pages == 0) return 0.0;
  const std::uint64_t busiest = ceil_div(pages, ssd.channels);
  const double xfer = io_time(ssd.page_size, ssd.flash_channel_bw);
  return ssd.t_dma + static_cast<double>(busiest) * xfer +
         static_cast<double>(ceil_div(busiest, ssd.chips_per_channel)) * ssd.t_program_page;
}

std::string_view system_name(System s) {
  switch (s) {
    case System::mars: return "MARS";
    case System::mars_external: return "MARS-External";
    case System::mars_bit_serial: return "MARS-BitSerial";
    case System::ms_smartssd: return "MS-SmartSSD";
  }
  return "?";
}

System system_from_name(std::string_view name) {
  for (System s : kAllSystems) {
    if (system_name(s) == name) return s;
  }
  std::string known;
  for (System s : kAllSystems) known += (known.empty() ? "" : ", ") + std::string(system_name(s));
  throw Error("unknown system '" + std::string(name) + "' (known: " + known + ")");
}

double arithmetic_compute_time(const StepTrace& step, const UnitConfig& units, bool bit_serial) {
  double cycles = 0.0;
  for (std::size_t i = 0; i < kOpClassCount; ++i) {
    const auto c = static_cast<OpClass>(i);
    double per_op = units.cycles.of(c);
    if (bit_serial) {
      if (c == OpClass::add || c == OpClass::compare) per_op *= units.bit_serial_add_factor;
      if (c == OpClass::multiply || c == OpClass::divide) per_op *= units.bit_serial_mul_factor;
    }
    cycles += static_cast<double>(step.ops[i]) * per_op;
  }
  if (cycles == 0.0) return 0.0;
  const std::uint64_t used = std::clamp<std::uint64_t>(step.work_items, 1, units.arithmetic_units);
  return cycles / (units.arithmetic_freq * static_cast<double>(used));
}

double sorter_time(const std::array<SortStats, kBucketCount>& buckets, const UnitConfig& units) {
  std::array<std::uint64_t, kBucketCount> load{};
  for (std::size_t b = 0; b < kBucketCount; ++b) load[b] = buckets[b].network_stages + buckets[b].merge_steps;
  return static_cast<double>(min_makespan(load, units.sorter_units)) / units.sorter_freq;
}

namespace {

// Pipelined load/query schedule for one region size.
QueryPlan plan_with_region(std::uint64_t index_bytes, std::uint64_t sweeps, std::uint64_t region,
                           const HardwareConfig& cfg) {
  const DramConfig& dram = cfg.dram;
  const std::uint64_t sweep_bytes = std::uint64_t{cfg.units.querying_units} * dram.row_bytes;
  QueryPlan plan;
  plan.region_bytes = region;
  plan.sweeps = sweeps;
  plan.partitions = ceil_div(index_bytes, region);
  for (std::uint64_t i = 0; i < plan.partitions; ++i) {
    const std::uint64_t bytes = std::min(region, index_bytes - i * region);
    const std::uint64_t rows_per_unit = ceil_div(bytes, sweep_bytes);
    plan.load_s.push_back(flash_read_time(bytes, cfg.ssd));
    plan.query_s.push_back(static_cast<double>(sweeps * rows_per_unit) * dram.t_row_activate);
    plan.rows_activated += sweeps * ceil_div(bytes, dram.row_bytes);
  }
  const std::size_t p = plan.load_s.size();
  double total = plan.load_s[0];
  for (std::size_t i = 0; i + 1 < p; ++i) total += std::max(plan.query_s[i], plan.load_s[i + 1]);
  plan.total_s = total + plan.query_s[p - 1];
  return plan;
}

}  // namespace

QueryPlan partitioned_query(std::uint64_t index_bytes, std::uint64_t lookups, const HardwareConfig& cfg) {
  if (index_bytes == 0 || lookups == 0) return {};
  const std::uint64_t sweeps = ceil_div(lookups, cfg.dram.row_bytes / 4);
  const std::uint64_t full = cfg.dram.region_bytes();
  QueryPlan best = plan_with_region(index_bytes, sweeps, full, cfg);
  // Halving stops on region size and partition count alone, so the candidates
  // for a DRAM twice as large are this DRAM's candidates plus one.
  for (std::uint64_t j = 1; j < 64; ++j) {
    const std::uint64_t region = ceil_div(full, std::uint64_t{1} << j);
    if (region < kMinRegionBytes || ceil_div(index_bytes, region) > kMaxPartitions) break;
    QueryPlan plan = plan_with_region(index_bytes, sweeps, region, cfg);
    if (plan.total_s < best.total_s) best = std::move(plan);
  }
  return best;
}

std::uint64_t StepCost::bytes_moved() const {
  std::uint64_t t = 0;
  for (auto b : hop_bytes) t += b;
  return t;
}

double CostReport::latency_s() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.latency_s();
  return t;
}

double CostReport::compute_s() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.compute_s;
  return t;
}

double CostReport::energy_j() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.energy_j;
  return t;
}

std::uint64_t CostReport::bytes_moved() const {
  std::uint64_t t = 0;
  for (const auto& r : rows) t += r.bytes_moved();
  return t;
}

CostReport simulate(const OperationTrace& trace, System system, const HardwareConfig& cfg) {
  cfg.validate();
  if (!trace.conserves_bytes()) {
    throw Error("simulate: trace is inconsistent (a step's bytes_out differs from the next step's bytes_in)");
  }
  const bool bit_serial = system == System::mars_bit_serial;
  const auto& e = cfg.energy;
  constexpr double kPico = 1e-12;

  CostReport report;
  report.system = system;
  for (std::size_t si = 0; si < kStepCount; ++si) {
    const auto step = static_cast<Step>(si);
    const StepTrace& st = trace.steps[si];
    StepCost row;
    row.label = std::string(step_label(step));
    auto move = [&](Hop h, std::uint64_t bytes, double seconds) {
      row.hop_bytes[static_cast<std::size_t>(h)] += bytes;
      row.movement_s += seconds;
    };

    double op_energy = 0.0;
    if (step == Step::query) {
      const QueryPlan plan = partitioned_query(trace.index_bytes, st.count(OpClass::lookup), cfg);
      for (double q : plan.query_s) row.compute_s += q;
      if (plan.partitions > 0) {
        // Exposed load time; the rest overlaps with querying.
        row.movement_s += plan.total_s - row.compute_s;
        row.hop_bytes[static_cast<std::size_t>(Hop::flash_channel)] += trace.index_bytes;
        row.hop_bytes[static_cast<std::size_t>(Hop::dram_bus)] += trace.index_bytes;
      }
      op_energy += static_cast<double>(plan.rows_activated) * e.row_activate_pj;
      for (std::size_t c = 0; c < kOpClassCount; ++c) op_energy += static_cast<double>(st.ops[c]) * e.op_pj[c];
    } else if (step == Step::sort) {
      row.compute_s = sorter_time(trace.sort_buckets, cfg.units);
      for (std::size_t c = 0; c < kOpClassCount; ++c) {
        const double pj = static_cast<OpClass>(c) == OpClass::compare ? e.sorter_comparator_pj : e.op_pj[c];
        op_energy += static_cast<double>(st.ops[c]) * pj;
      }
    } else {
      row.compute_s = arithmetic_compute_time(st, cfg.units, bit_serial);
      for (std::size_t c = 0; c < kOpClassCount; ++c) {
        const auto oc = static_cast<OpClass>(c);
        double pj = e.op_pj[c];
        if (bit_serial && oc != OpClass::lookup) pj *= e.bit_serial_factor;
        op_energy += static_cast<double>(st.ops[c]) * pj;
      }
    }

    if (step == Step::quantize) move(Hop::flash_channel, st.bytes_in, flash_read_time(st.bytes_in, cfg.ssd));
    move(Hop::dram_bus, st.bytes_in + st.bytes_out, io_time(st.bytes_in + st.bytes_out, cfg.dram.bus_bw));
    if (system == System::ms_smartssd && step == Step::sort) {
      move(Hop::fpga_link, st.bytes_in + st.bytes_out, io_time(st.bytes_in + st.bytes_out, cfg.ssd.fpga_link_bw));
    }
    if (system == System::mars_external) {
      std::uint64_t bytes = st.bytes_in;
      if (step == Step::query && st.count(OpClass::lookup) > 0) bytes += trace.index_bytes;
      move(Hop::external_link, bytes, io_time(bytes, cfg.ssd.external_link_bw));
    }

    double hop_energy = 0.0;
    for (std::size_t h = 0; h < kHopCount; ++h) hop_energy += static_cast<double>(row.hop_bytes[h]) * e.hop_pj_per_byte[h];
    row.energy_j = (op_energy + hop_energy) * kPico;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_tsv(std::ostream& out, std::span<const CostReport> reports) {
  out << "step\tsystem\tlatency_s\tenergy_j\tbytes_moved\n";
  for (const auto& r : reports) {
    const std::string sys(system_name(r.system));
    for (const auto& row : r.rows) {
      out << row.label << '\t' << sys << '\t' << format_double(row.latency_s()) << '\t'
          << format_double(row.energy_j) << '\t' << row.bytes_moved() << '\n';
    }
    out << "total\t" << sys << '\t' << format_double(r.latency_s()) << '\t' << format_double(r.energy_j())
        << '\t' << r.bytes_moved() << '\n';
  }
}

std::string report_summary(const CostReport& report) {
  std::ostringstream ss;
  ss << system_name(report.system) << ": latency " << format_double(report.latency_s()) << " s (compute "
     << format_double(report.compute_s()) << " s), energy " << format_double(report.energy_j()) << " J, moved "
     << report.bytes_moved() << " B";
  return ss.str();
}

std::vector<ReportTotal> read_report_totals(std::istream& in) {
  std::vector<ReportTotal> totals;
  std::string line;
  if (!std::getline(in, line) || line != "step\tsystem\tlatency_s\tenergy_j\tbytes_moved") {
    throw Error("cost report: missing or unexpected header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string step;
    ReportTotal t;
    if (!(ss >> step >> t.system >> t.latency_s >> t.energy_j >> t.bytes_moved)) {
      throw Error("cost report: malformed row at line " + std::to_string(line_no));
    }
    if (step == "total") totals.push_back(std::move(t));
  }
  return totals;
}

std::vector<ReportTotal> read_report_totals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  return read_report_totals(in);
}

ModeState mode_switch(const ModeState& state, NvmeCommand cmd, const HardwareConfig& cfg,
                      std::uint64_t result_bytes, CostReport* report) {
  ModeState next = state;
  if (cmd == NvmeCommand::mars_init) {
    if (state.mode == SsdMode::accelerator) throw Error("MARS_Init: already in accelerator mode");
    next.mode = SsdMode::accelerator;
    next.metadata_flushed = true;
    ++next.switches;
    return next;
  }
  if (state.mode != SsdMode::accelerator) throw Error("MARS_Write: not in accelerator mode");
  next.mode = SsdMode::conventional;
  next.result_bytes_written += result_bytes;
  ++next.switches;
  if (report) {
    StepCost row;
    row.label = "mode_write";
    row.hop_bytes[static_cast<std::size_t>(Hop::dram_bus)] = result_bytes;
    row.hop_bytes[static_cast<std::size_t>(Hop::flash_channel)] = result_bytes;
    row.movement_s = io_time(result_bytes, cfg.dram.bus_bw) + flash_write_time(result_bytes, cfg.ssd);
    row.energy_j = static_cast<double>(result_bytes) *
                   (cfg.energy.hop_pj_per_byte[static_cast<std::size_t>(Hop::dram_bus)] +
                    cfg.energy.hop_pj_per_byte[static_cast<std::size_t>(Hop::flash_channel)]) *
                   1e-12;
    report->rows.push_back(std::move(row));
  }
  return next;
}

}  // namespace rawisp
