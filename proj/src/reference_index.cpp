#include "rawisp/reference_index.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rawisp/error.hpp"

namespace rawisp {

namespace {

constexpr std::uint32_t kMagic = 0x58495352;  // "RSIX" little-endian
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTagHeader = 0x20524448;  // "HDR "
constexpr std::uint32_t kTagQuant = 0x20544e51;   // "QNT "
constexpr std::uint32_t kTagPostings = 0x20545350;  // "PST "

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  std::size_t size() const { return buf_.size(); }
  std::vector<std::uint8_t>& buffer() { return buf_; }
  void patch_u64(std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw Error("index: truncated data");
  }

 private:
  std::uint64_t get(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

SeedHash seed_hash(std::span<const std::uint16_t> symbols, int bucket_bits) {
  std::uint64_t packed = 0;
  for (std::uint16_t s : symbols) packed = std::rotl(packed, bucket_bits) ^ s;
  return static_cast<SeedHash>(fmix64(packed));
}

SeedHash seed_hash(std::span<const Event> events, int bucket_bits) {
  std::uint64_t packed = 0;
  for (const Event& e : events) packed = std::rotl(packed, bucket_bits) ^ e.symbol;
  return static_cast<SeedHash>(fmix64(packed));
}

ReferenceIndex build_index(const EventSequence& ref_events, std::size_t n_events_per_seed,
                           std::uint64_t reference_length) {
  if (n_events_per_seed < kMinSeedEvents || n_events_per_seed > kMaxSeedEvents) {
    throw Error("n_events_per_seed must be in [2, 16], got " + std::to_string(n_events_per_seed));
  }
  const auto& ev = ref_events.events;
  if (ev.size() < n_events_per_seed) {
    throw Error("too few events to index: " + std::to_string(ev.size()) + " < " +
                std::to_string(n_events_per_seed));
  }
  if (reference_length == 0) reference_length = std::uint64_t{ev.back().start_index} + 1;
  if (reference_length > (std::uint64_t{1} << 32)) throw Error("reference longer than 4 Gb");

  ReferenceIndex idx;
  idx.n_events_per_seed_ = n_events_per_seed;
  idx.reference_length_ = reference_length;
  idx.reference_name_ = ref_events.read_id;
  idx.quant_ = ref_events.params;
  idx.format_ = ref_events.format;
  idx.merged_repeats_ = ref_events.merged_repeats;

  const std::size_t windows = ev.size() - n_events_per_seed + 1;
  std::vector<std::pair<SeedHash, std::uint32_t>> entries;
  entries.reserve(windows);
  const int bits = ref_events.params.bucket_bits;
  for (std::size_t i = 0; i < windows; ++i) {
    const std::uint32_t pos = ev[i].start_index;
    if (pos >= reference_length) throw Error("event position outside reference");
    entries.emplace_back(seed_hash(std::span(ev).subspan(i, n_events_per_seed), bits), pos);
  }
  std::sort(entries.begin(), entries.end());

  idx.positions_.reserve(entries.size());
  idx.offsets_.push_back(0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].first != entries[i - 1].first) {
      if (i != 0) idx.offsets_.push_back(static_cast<std::uint32_t>(idx.positions_.size()));
      idx.hashes_.push_back(entries[i].first);
    }
    idx.positions_.push_back(entries[i].second);
  }
  idx.offsets_.push_back(static_cast<std::uint32_t>(idx.positions_.size()));
  return idx;
}

ReferenceIndex index_reference(const Sequence& reference, const PoreModel& model,
                               const IndexParams& params) {
  EventSequence events = reference_to_events(reference, model, params.bucket_bits, params.format);
  if (params.merge_repeats) merge_repeated_symbols(events);
  return build_index(events, params.n_events_per_seed, reference.bases.size());
}

std::size_t ReferenceIndex::lookup(SeedHash h) const {
  const auto it = std::lower_bound(hashes_.begin(), hashes_.end(), h);
  if (it == hashes_.end() || *it != h) return hashes_.size();
  return static_cast<std::size_t>(it - hashes_.begin());
}

std::span<const std::uint32_t> ReferenceIndex::query(SeedHash h) const {
  const std::size_t i = lookup(h);
  if (i == hashes_.size()) return {};
  return std::span(positions_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::uint32_t ReferenceIndex::frequency(SeedHash h) const {
  const std::size_t i = lookup(h);
  return i == hashes_.size() ? 0 : offsets_[i + 1] - offsets_[i];
}

std::uint64_t ReferenceIndex::size_bytes() const {
  const std::uint64_t preamble = 4 + 4;
  const std::uint64_t header = 4 + 8 + 4 + 8 + 4 + 4 + reference_name_.size();
  const std::uint64_t quant = 4 + 8 + 4 + 4 + 8 + 8;
  const std::uint64_t postings = 4 + 8 + 8 + 8 + 8 * hashes_.size() + 4 * positions_.size();
  return preamble + header + quant + postings + 4;
}

std::vector<std::uint8_t> ReferenceIndex::serialize() const {
  Writer w;
  w.u32(kMagic);
  w.u32(kVersion);

  auto section = [&](std::uint32_t tag, auto&& body) {
    w.u32(tag);
    const std::size_t len_at = w.size();
    w.u64(0);
    const std::size_t start = w.size();
    body();
    w.patch_u64(len_at, w.size() - start);
  };
  section(kTagHeader, [&] {
    w.u32(static_cast<std::uint32_t>(n_events_per_seed_));
    w.u64(reference_length_);
    w.u32(merged_repeats_ ? 1u : 0u);
    w.u32(static_cast<std::uint32_t>(reference_name_.size()));
    w.bytes(reference_name_);
  });
  section(kTagQuant, [&] {
    w.i32(quant_.bucket_bits);
    w.i32(format_.fractional_bits);
    w.f64(quant_.shift);
    w.f64(quant_.scale);
  });
  section(kTagPostings, [&] {
    w.u64(hashes_.size());
    w.u64(positions_.size());
    for (std::size_t i = 0; i < hashes_.size(); ++i) {
      w.u32(hashes_[i]);
      w.u32(offsets_[i + 1] - offsets_[i]);
      for (std::uint32_t p = offsets_[i]; p < offsets_[i + 1]; ++p) w.u32(positions_[p]);
    }
  });
  const std::uint32_t crc = crc_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

ReferenceIndex ReferenceIndex::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw Error("index: truncated data");
  Reader r(bytes);
  if (r.u32() != kMagic) throw Error("index: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw Error("index: version mismatch (file " + std::to_string(version) + ", expected " +
                std::to_string(kVersion) + ")");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (crc_of(body) != tail.u32()) throw Error("index: checksum failure");

  Reader in(body);
  in.u32();
  in.u32();
  auto expect_section = [&](std::uint32_t tag) {
    if (in.u32() != tag) throw Error("index: unexpected section");
    const std::uint64_t len = in.u64();
    in.need(len);
    return in.pos() + len;
  };

  ReferenceIndex idx;
  std::size_t end = expect_section(kTagHeader);
  idx.n_events_per_seed_ = in.u32();
  idx.reference_length_ = in.u64();
  const std::uint32_t flags = in.u32();
  if (flags > 1) throw Error("index: unknown header flags");
  idx.merged_repeats_ = flags == 1;
  idx.reference_name_ = in.str(in.u32());
  if (in.pos() != end) throw Error("index: malformed header section");

  end = expect_section(kTagQuant);
  idx.quant_.bucket_bits = in.i32();
  idx.format_.fractional_bits = in.i32();
  idx.quant_.shift = in.f64();
  idx.quant_.scale = in.f64();
  if (in.pos() != end) throw Error("index: malformed quantization section");
  idx.quant_.validate();
  idx.format_.validate();

  end = expect_section(kTagPostings);
  const std::uint64_t n_hashes = in.u64();
  const std::uint64_t n_positions = in.u64();
  in.need(n_hashes * 8 + n_positions * 4);
  idx.hashes_.reserve(n_hashes);
  idx.offsets_.reserve(n_hashes + 1);
  idx.positions_.reserve(n_positions);
  idx.offsets_.push_back(0);
  for (std::uint64_t i = 0; i < n_hashes; ++i) {
    const SeedHash h = in.u32();
    if (!idx.hashes_.empty() && h <= idx.hashes_.back()) throw Error("index: hashes not ascending");
    idx.hashes_.push_back(h);
    const std::uint32_t count = in.u32();
    if (count == 0) throw Error("index: empty posting list");
    for (std::uint32_t c = 0; c < count; ++c) {
      const std::uint32_t p = in.u32();
      if (p >= idx.reference_length_) throw Error("index: position outside reference");
      idx.positions_.push_back(p);
    }
    idx.offsets_.push_back(static_cast<std::uint32_t>(idx.positions_.size()));
  }
  if (idx.positions_.size() != n_positions || in.pos() != end || end != body.size()) {
    throw Error("index: malformed postings section");
  }
  return idx;
}

void ReferenceIndex::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

ReferenceIndex ReferenceIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace rawisp
