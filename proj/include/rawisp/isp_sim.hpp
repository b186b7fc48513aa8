#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rawisp/trace.hpp"

namespace rawisp {

// Times in seconds, bandwidths in bytes/s, sizes in bytes.
struct SsdConfig {
  std::uint32_t channels = 8;
  std::uint32_t chips_per_channel = 8;
  double t_dma = 16e-6;
  double t_read_page = 22.5e-6;
  double t_program_page = 1.5e-3;  // not a published figure; only used by MARS_Write
  double flash_channel_bw = 1e9;
  double external_link_bw = 1.2e9;
  double fpga_link_bw = 3e9;
  std::uint64_t page_size = 16384;

  void validate() const;
};

struct DramConfig {
  std::uint64_t capacity_bytes = std::uint64_t{4} << 30;
  std::uint32_t banks = 16;
  std::uint32_t subarrays = 512;
  std::uint32_t rows_per_subarray = 256;
  std::uint32_t row_bytes = 2048;
  double bus_bw = 12.8e9;          // controller <-> DRAM
  double t_row_activate = 50e-9;   // per swept row
  double index_fraction = 0.65;    // share of capacity holding one index region

  void validate() const;
  // Bytes of index held per partition: ceil(capacity * index_fraction).
  std::uint64_t region_bytes() const;
};

struct CycleTable {
  std::uint32_t add = 1;
  std::uint32_t compare = 1;
  std::uint32_t multiply = 4;
  std::uint32_t divide = 16;
  std::uint32_t lookup = 4;

  std::uint32_t of(OpClass c) const;
};

struct UnitConfig {
  std::uint32_t arithmetic_units = 256;
  double arithmetic_freq = 164e6;
  CycleTable cycles{};
  std::uint32_t querying_units = 512;
  std::uint32_t sorter_units = 8;
  double sorter_freq = 1e9;
  // Bit-serial arithmetic: cycle multipliers for 16-bit operands.
  std::uint32_t bit_serial_add_factor = 16;     // add, compare
  std::uint32_t bit_serial_mul_factor = 256;    // multiply, divide

  void validate() const;
};

enum class Hop : std::uint8_t { flash_channel, dram_bus, fpga_link, external_link };
inline constexpr std::size_t kHopCount = 4;
std::string_view hop_name(Hop h);

// Invented stand-ins, not measurements.
struct EnergyTable {
  std::array<double, kOpClassCount> op_pj{0.5, 0.5, 2.0, 8.0, 1.0};  // indexed by OpClass
  double sorter_comparator_pj = 0.3;
  double row_activate_pj = 900.0;
  std::array<double, kHopCount> hop_pj_per_byte{20.0, 15.0, 40.0, 60.0};  // indexed by Hop
  double bit_serial_factor = 0.25;  // scales arithmetic op energy

  void validate() const;
};

struct HardwareConfig {
  SsdConfig ssd;
  DramConfig dram;
  UnitConfig units;
  EnergyTable energy;

  void validate() const;
};

// INI sections [ssd], [dram], [units], [energy]. Missing keys keep their
// defaults; unknown sections or keys are errors.
HardwareConfig parse_hardware_config(std::istream& in);
HardwareConfig load_hardware_config(const std::string& path);
void write_hardware_config(std::ostream& out, const HardwareConfig& cfg);

// Same hardware with DRAM capacity scaled by `factor`. Subarrays and the
// querying units that sit one per subarray scale with it.
HardwareConfig scale_dram(const HardwareConfig& cfg, std::uint32_t factor);

double io_time(std::uint64_t bytes, double bandwidth);

// Pages are dealt round-robin over channels. A channel holding p pages takes
//   t_dma + t_read_page + x + (p - 1) * max(t_read_page / chips_per_channel, x)
// with x = page_size / flash_channel_bw: one read latency up front, then chip
// reads overlap with the channel transfer. The slowest channel wins.
double flash_read_time(std::uint64_t bytes, const SsdConfig& ssd);
// Same striping; programs of pages on different chips overlap.
double flash_write_time(std::uint64_t bytes, const SsdConfig& ssd);

enum class System : std::uint8_t { mars, mars_external, mars_bit_serial, ms_smartssd };
inline constexpr std::array<System, 4> kAllSystems{System::mars, System::ms_smartssd,
                                                   System::mars_external, System::mars_bit_serial};
std::string_view system_name(System s);
System system_from_name(std::string_view name);  // throws, listing valid names

// Sum over op classes of count * cycles / (freq * min(units, work_items)).
// With bit_serial, add/compare and multiply/divide cycles are scaled.
double arithmetic_compute_time(const StepTrace& step, const UnitConfig& units, bool bit_serial);

// Each bucket costs one cycle per network stage and per merge step; buckets
// are spread over the sorter units with the smallest possible makespan.
double sorter_time(const std::array<SortStats, kBucketCount>& buckets, const UnitConfig& units);

struct QueryPlan {
  std::uint64_t region_bytes = 0;  // index bytes loaded per partition
  std::uint64_t partitions = 0;
  std::uint64_t sweeps = 0;  // seed batches, each compared against every row
  std::vector<double> load_s;
  std::vector<double> query_s;
  std::uint64_t rows_activated = 0;
  double total_s = 0.0;
};

// Index regions are loaded from flash in turn; every region is swept once per
// batch of row_bytes/4 seed lookups, each querying unit activating its share
// of the region's rows. Loading region i+1 overlaps querying region i:
//   total = load_1 + sum_{i<P} max(query_i, load_{i+1}) + query_P
// Regions are dram.region_bytes() or, when that pipelines better, an even
// power-of-two split of it (never below kMinRegionBytes or above
// kMaxPartitions partitions). The cheapest split is taken, so more DRAM never
// makes querying slower.
inline constexpr std::uint64_t kMinRegionBytes = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kMaxPartitions = std::uint64_t{1} << 16;
QueryPlan partitioned_query(std::uint64_t index_bytes, std::uint64_t lookups, const HardwareConfig& cfg);
// Fewest partitions the DRAM allows.
inline std::uint64_t partition_count(std::uint64_t index_bytes, const DramConfig& dram) {
  const std::uint64_t region = dram.region_bytes();
  return index_bytes == 0 ? 0 : (index_bytes + region - 1) / region;
}

struct StepCost {
  std::string label;
  double compute_s = 0.0;
  double movement_s = 0.0;
  double energy_j = 0.0;
  std::array<std::uint64_t, kHopCount> hop_bytes{};

  double latency_s() const { return compute_s + movement_s; }
  std::uint64_t bytes_moved() const;
};

struct CostReport {
  System system = System::mars;
  std::vector<StepCost> rows;  // one per pipeline step, plus any mode-switch rows

  double latency_s() const;
  double compute_s() const;
  double energy_j() const;
  std::uint64_t bytes_moved() const;
};

// Replays a trace on one placement:
//  MARS             flash -> controller -> DRAM only; compute on in-storage units.
//  MS-SmartSSD      as MARS, but the sort step's input and output also cross
//                   the SSD-FPGA link.
//  MARS-External    as MARS, plus every step's input crossing the external
//                   link and the index and raw input leaving the SSD once.
//  MARS-BitSerial   as MARS with bit-serial arithmetic cycles and energy.
CostReport simulate(const OperationTrace& trace, System system, const HardwareConfig& cfg);

void write_report_tsv(std::ostream& out, std::span<const CostReport> reports);
std::string report_summary(const CostReport& report);

// The "total" rows of a report TSV, in file order.
struct ReportTotal {
  std::string system;
  double latency_s = 0.0;
  double energy_j = 0.0;
  std::uint64_t bytes_moved = 0;
};
std::vector<ReportTotal> read_report_totals(std::istream& in);
std::vector<ReportTotal> read_report_totals(const std::string& path);

enum class SsdMode : std::uint8_t { conventional, accelerator };
enum class NvmeCommand : std::uint8_t { mars_init, mars_write };

struct ModeState {
  SsdMode mode = SsdMode::conventional;
  bool metadata_flushed = false;
  std::uint64_t result_bytes_written = 0;
  std::uint32_t switches = 0;

  friend bool operator==(const ModeState&, const ModeState&) = default;
};

// Init: conventional -> accelerator, flushes metadata. Write: accelerator ->
// conventional, writes `result_bytes` back to flash and, if a report is
// given, appends a "mode_write" row with that cost.
ModeState mode_switch(const ModeState& state, NvmeCommand cmd, const HardwareConfig& cfg,
                      std::uint64_t result_bytes = 0, CostReport* report = nullptr);

}  // namespace rawisp
