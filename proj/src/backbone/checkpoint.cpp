#include "gft/backbone/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "gft/errors.hpp"

namespace gft::backbone {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'F', 'T', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint8_t kFloat32 = 0;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u8(std::ostream& os, std::uint8_t v) { os.write(reinterpret_cast<const char*>(&v), 1); }

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  void bytes(void* dst, std::size_t n) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) throw FormatError("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    bytes(&v, 4);
    return v;
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    bytes(&v, 1);
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_checkpoint(const numcore::ParamStore& store, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_u8(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(store.params().size()));
  for (const auto& p : store.params()) {
    put_u32(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u8(os, kFloat32);
    put_u8(os, p.frozen ? 1 : 0);
    const auto& shape = p.tensor.shape();
    put_u32(os, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_u32(os, static_cast<std::uint32_t>(d));
    std::vector<float> payload(p.tensor.size());
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(p.tensor.values()[i]);
    os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 4));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open " + path.string());
  Reader rd(is);
  std::array<char, 8> magic{};
  rd.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw FormatError("checkpoint: bad magic in " + path.string());
  const auto version = rd.u8();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto count = rd.u32();
  std::vector<CheckpointEntry> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    CheckpointEntry entry;
    const auto name_len = rd.u32();
    if (name_len > (1u << 16)) throw FormatError("checkpoint: implausible name length");
    entry.name.resize(name_len);
    rd.bytes(entry.name.data(), name_len);
    if (rd.u8() != kFloat32) throw FormatError("checkpoint: unsupported dtype for '" + entry.name + "'");
    entry.frozen = rd.u8() != 0;
    const auto ndim = rd.u32();
    if (ndim == 0 || ndim > 8) throw FormatError("checkpoint: bad rank for '" + entry.name + "'");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      entry.shape.push_back(rd.u32());
      if (entry.shape.back() == 0) throw FormatError("checkpoint: zero dimension in '" + entry.name + "'");
      n *= entry.shape.back();
    }
    if (n > (std::size_t{1} << 32)) throw FormatError("checkpoint: implausible tensor size");
    entry.payload.resize(n);
    rd.bytes(entry.payload.data(), n * 4);
    entries.push_back(std::move(entry));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes after last entry");
  return entries;
}

void apply_checkpoint(numcore::ParamStore& store, const std::vector<CheckpointEntry>& entries) {
  std::string unknown;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!store.contains(e.name)) unknown += (unknown.empty() ? "" : ", ") + e.name;
  }
  if (!unknown.empty()) throw FormatError("checkpoint: unknown tensor name(s): " + unknown);
  for (const auto& e : entries) {
    const auto& p = store.get(e.name);
    if (p.tensor.shape() != e.shape) {
      throw FormatError("checkpoint: shape mismatch for '" + e.name + "': file " + numcore::shape_str(e.shape) +
                        " vs model " + numcore::shape_str(p.tensor.shape()));
    }
    seen.insert(e.name);
  }
  std::string missing;
  for (const auto& p : store.params()) {
    if (!seen.count(p.name)) missing += (missing.empty() ? "" : ", ") + p.name;
  }
  if (!missing.empty()) throw FormatError("checkpoint: missing tensor(s): " + missing);
  for (const auto& e : entries) {
    auto& p = store.get(e.name);
    auto dst = p.tensor.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(e.payload[i]);
    p.frozen = e.frozen;
  }
}

void load_checkpoint(numcore::ParamStore& store, const std::filesystem::path& path) {
  apply_checkpoint(store, read_checkpoint(path));
}

}  // namespace gft::backbone
