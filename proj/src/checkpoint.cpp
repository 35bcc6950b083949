#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dicg/checkpoint.hpp"

namespace dicg {

namespace {

constexpr char kMagic[8] = {'D', 'I', 'C', 'G', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& os, uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(b[i]) << (8 * i);
  return x;
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
  return x;
}

double get_f64(std::istream& is) {
  uint64_t bits = get_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const ParameterStore& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  put_u32(os, kCheckpointVersion);
  const auto names = store.names();
  put_u64(os, names.size());
  for (const auto& name : names) {
    const auto m = store.get(name);
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(m->rows));
    put_u32(os, static_cast<uint32_t>(m->cols));
    for (double x : m->v) put_f64(os, x);
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

std::map<std::string, Matrix> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: '" + path + "' is not a checkpoint file");
  const uint32_t version = get_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version " +
                             std::to_string(version));
  const uint64_t count = get_u64(is);
  std::map<std::string, Matrix> out;
  for (uint64_t i = 0; i < count; ++i) {
    const uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const uint32_t rows = get_u32(is);
    const uint32_t cols = get_u32(is);
    if (!is) throw std::runtime_error("load_checkpoint: truncated file '" + path + "'");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (double& x : m.v) x = get_f64(is);
    if (!is) throw std::runtime_error("load_checkpoint: truncated file '" + path + "'");
    if (!out.emplace(std::move(name), std::move(m)).second)
      throw std::runtime_error("load_checkpoint: duplicate parameter name in '" + path + "'");
  }
  return out;
}

}  // namespace dicg
