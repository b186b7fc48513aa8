#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "rawisp/error.hpp"
#include "rawisp/isp_sim.hpp"

namespace rawisp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("hardware config: " + what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

// One config key: where it lives, how it maps onto the struct and the unit
// written in the file (value_in_file = value * to_file).
struct Field {
  const char* section;
  const char* key;
  std::function<double(const HardwareConfig&)> get;
  std::function<void(HardwareConfig&, double)> set;
  double to_file = 1.0;
  bool integer = false;
};

template <class T>
Field int_field(const char* section, const char* key, T HardwareConfig::*part, auto member) {
  return {section, key,
          [=](const HardwareConfig& c) { return static_cast<double>((c.*part).*member); },
          [=](HardwareConfig& c, double v) {
            using V = std::remove_reference_t<decltype((c.*part).*member)>;
            (c.*part).*member = static_cast<V>(v);
          },
          1.0, true};
}

template <class T>
Field real_field(const char* section, const char* key, T HardwareConfig::*part, double T::*member,
                 double to_file = 1.0) {
  return {section, key, [=](const HardwareConfig& c) { return (c.*part).*member; },
          [=](HardwareConfig& c, double v) { (c.*part).*member = v; }, to_file, false};
}

Field array_field(const char* section, const char* key, std::size_t index, bool hop) {
  return {section, key,
          [=](const HardwareConfig& c) {
            return hop ? c.energy.hop_pj_per_byte[index] : c.energy.op_pj[index];
          },
          [=](HardwareConfig& c, double v) {
            (hop ? c.energy.hop_pj_per_byte[index] : c.energy.op_pj[index]) = v;
          },
          1.0, false};
}

const std::vector<Field>& fields() {
  using H = HardwareConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("ssd", "channels", &H::ssd, &SsdConfig::channels));
    f.push_back(int_field("ssd", "chips_per_channel", &H::ssd, &SsdConfig::chips_per_channel));
    f.push_back(real_field("ssd", "t_dma_us", &H::ssd, &SsdConfig::t_dma, 1e6));
    f.push_back(real_field("ssd", "t_read_page_us", &H::ssd, &SsdConfig::t_read_page, 1e6));
    f.push_back(real_field("ssd", "t_program_page_us", &H::ssd, &SsdConfig::t_program_page, 1e6));
    f.push_back(real_field("ssd", "flash_channel_bw_gbps", &H::ssd, &SsdConfig::flash_channel_bw, 1e-9));
    f.push_back(real_field("ssd", "external_link_bw_gbps", &H::ssd, &SsdConfig::external_link_bw, 1e-9));
    f.push_back(real_field("ssd", "fpga_link_bw_gbps", &H::ssd, &SsdConfig::fpga_link_bw, 1e-9));
    f.push_back(int_field("ssd", "page_size_bytes", &H::ssd, &SsdConfig::page_size));

    f.push_back(int_field("dram", "capacity_bytes", &H::dram, &DramConfig::capacity_bytes));
    f.push_back(int_field("dram", "banks", &H::dram, &DramConfig::banks));
    f.push_back(int_field("dram", "subarrays", &H::dram, &DramConfig::subarrays));
    f.push_back(int_field("dram", "rows_per_subarray", &H::dram, &DramConfig::rows_per_subarray));
    f.push_back(int_field("dram", "row_bytes", &H::dram, &DramConfig::row_bytes));
    f.push_back(real_field("dram", "bus_bw_gbps", &H::dram, &DramConfig::bus_bw, 1e-9));
    f.push_back(real_field("dram", "t_row_activate_ns", &H::dram, &DramConfig::t_row_activate, 1e9));
    f.push_back(real_field("dram", "index_fraction", &H::dram, &DramConfig::index_fraction));

    f.push_back(int_field("units", "arithmetic_units", &H::units, &UnitConfig::arithmetic_units));
    f.push_back(real_field("units", "arithmetic_freq_mhz", &H::units, &UnitConfig::arithmetic_freq, 1e-6));
    auto cycles = [&](const char* key, std::uint32_t CycleTable::*m) {
      f.push_back({"units", key, [=](const H& c) { return static_cast<double>(c.units.cycles.*m); },
                   [=](H& c, double v) { c.units.cycles.*m = static_cast<std::uint32_t>(v); }, 1.0, true});
    };
    cycles("cycles_add", &CycleTable::add);
    cycles("cycles_compare", &CycleTable::compare);
    cycles("cycles_multiply", &CycleTable::multiply);
    cycles("cycles_divide", &CycleTable::divide);
    cycles("cycles_lookup", &CycleTable::lookup);
    f.push_back(int_field("units", "querying_units", &H::units, &UnitConfig::querying_units));
    f.push_back(int_field("units", "sorter_units", &H::units, &UnitConfig::sorter_units));
    f.push_back(real_field("units", "sorter_freq_mhz", &H::units, &UnitConfig::sorter_freq, 1e-6));
    f.push_back(int_field("units", "bit_serial_add_factor", &H::units, &UnitConfig::bit_serial_add_factor));
    f.push_back(int_field("units", "bit_serial_mul_factor", &H::units, &UnitConfig::bit_serial_mul_factor));

    f.push_back(array_field("energy", "add_pj", 0, false));
    f.push_back(array_field("energy", "compare_pj", 1, false));
    f.push_back(array_field("energy", "multiply_pj", 2, false));
    f.push_back(array_field("energy", "divide_pj", 3, false));
    f.push_back(array_field("energy", "lookup_pj", 4, false));
    f.push_back(real_field("energy", "sorter_comparator_pj", &H::energy, &EnergyTable::sorter_comparator_pj));
    f.push_back(real_field("energy", "row_activate_pj", &H::energy, &EnergyTable::row_activate_pj));
    f.push_back(array_field("energy", "flash_channel_pj_per_byte", 0, true));
    f.push_back(array_field("energy", "dram_bus_pj_per_byte", 1, true));
    f.push_back(array_field("energy", "fpga_link_pj_per_byte", 2, true));
    f.push_back(array_field("energy", "external_link_pj_per_byte", 3, true));
    f.push_back(real_field("energy", "bit_serial_factor", &H::energy, &EnergyTable::bit_serial_factor));
    return f;
  }();
  return table;
}

double parse_number(const std::string& text, const std::string& where, bool integer) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  require(ec == std::errc{} && ptr == end && std::isfinite(v), where + ": not a number: '" + text + "'");
  if (integer) {
    require(v >= 0.0 && v == std::floor(v) && v < 1.8e19, where + ": expected a non-negative integer");
  }
  return v;
}

}  // namespace

void SsdConfig::validate() const {
  require(channels >= 1 && chips_per_channel >= 1, "ssd.channels and ssd.chips_per_channel must be >= 1");
  require(positive(t_dma) && positive(t_read_page) && positive(t_program_page), "ssd timings must be > 0");
  require(positive(flash_channel_bw) && positive(external_link_bw) && positive(fpga_link_bw),
          "ssd bandwidths must be > 0");
  require(page_size >= 1, "ssd.page_size must be >= 1");
}

void DramConfig::validate() const {
  require(capacity_bytes >= 1, "dram.capacity_bytes must be >= 1");
  require(banks >= 1 && subarrays >= 1 && rows_per_subarray >= 1 && row_bytes >= 4,
          "dram geometry must be positive (row_bytes >= 4)");
  require(positive(bus_bw) && positive(t_row_activate), "dram.bus_bw and dram.t_row_activate must be > 0");
  require(index_fraction > 0.0 && index_fraction <= 1.0, "dram.index_fraction must be in (0, 1]");
  const double geometry = double(banks) * subarrays * rows_per_subarray * row_bytes;
  const double cap = static_cast<double>(capacity_bytes);
  require(geometry >= cap / 2.0 && geometry <= cap * 2.0,
          "dram geometry (banks*subarrays*rows*row_bytes) must be within 2x of capacity");
}

std::uint64_t DramConfig::region_bytes() const {
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(capacity_bytes) * index_fraction));
}

std::uint32_t CycleTable::of(OpClass c) const {
  switch (c) {
    case OpClass::add: return add;
    case OpClass::compare: return compare;
    case OpClass::multiply: return multiply;
    case OpClass::divide: return divide;
    case OpClass::lookup: return lookup;
  }
  return 0;
}

void UnitConfig::validate() const {
  require(arithmetic_units >= 1 && querying_units >= 1 && sorter_units >= 1, "unit counts must be >= 1");
  require(positive(arithmetic_freq) && positive(sorter_freq), "unit frequencies must be > 0");
  require(bit_serial_add_factor >= 1 && bit_serial_mul_factor >= 1, "bit-serial factors must be >= 1");
}

void EnergyTable::validate() const {
  for (double e : op_pj) require(std::isfinite(e) && e >= 0.0, "energy entries must be >= 0");
  for (double e : hop_pj_per_byte) require(std::isfinite(e) && e >= 0.0, "energy entries must be >= 0");
  require(std::isfinite(sorter_comparator_pj) && sorter_comparator_pj >= 0.0 && std::isfinite(row_activate_pj) &&
              row_activate_pj >= 0.0,
          "energy entries must be >= 0");
  require(std::isfinite(bit_serial_factor) && bit_serial_factor >= 0.0, "energy.bit_serial_factor must be >= 0");
}

void HardwareConfig::validate() const {
  ssd.validate();
  dram.validate();
  units.validate();
  energy.validate();
}

HardwareConfig parse_hardware_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("hardware config: ") + e.what());
  }
  HardwareConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error("hardware config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const auto& table = fields();
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Field& f) { return section == f.section && key == f.key; });
      if (it == table.end()) throw Error("hardware config: unknown key [" + section + "] " + key);
      const std::string where = "[" + section + "] " + key;
      it->set(cfg, parse_number(value.data(), where, it->integer) / it->to_file);
    }
  }
  cfg.validate();
  return cfg;
}

HardwareConfig load_hardware_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open hardware config");
  try {
    return parse_hardware_config(in);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_hardware_config(std::ostream& out, const HardwareConfig& cfg) {
  const char* current = "";
  for (const Field& f : fields()) {
    if (std::string_view(current) != f.section) {
      if (*current) out << '\n';
      out << '[' << f.section << "]\n";
      current = f.section;
    }
    const double v = f.get(cfg) * f.to_file;
    out << f.key << " = ";
    if (f.integer) {
      out << static_cast<std::uint64_t>(v);
    } else {
      // 12 digits hide the unit-conversion noise (16e-6 s * 1e6 is not 16).
      std::ostringstream ss;
      ss.precision(12);
      ss << v;
      out << ss.str();
    }
    out << '\n';
  }
}

HardwareConfig scale_dram(const HardwareConfig& cfg, std::uint32_t factor) {
  if (factor == 0) throw Error("scale_dram: factor must be >= 1");
  HardwareConfig out = cfg;
  out.dram.capacity_bytes *= factor;
  out.dram.subarrays *= factor;
  out.units.querying_units *= factor;
  out.validate();
  return out;
}

}  // namespace rawisp
