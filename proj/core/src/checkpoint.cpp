#include "fedfwd/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

constexpr char kMagic[8] = {'F', 'F', 'W', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindFF = 0;
constexpr std::uint32_t kKindBP = 1;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size, const std::filesystem::path& path)
      : data_(data), size_(size), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  void raw(void* dst, std::size_t count) {
    need(count);
    std::memcpy(dst, data_ + pos_, count);
    pos_ += count;
  }

  bool exhausted() const { return pos_ == size_; }

 private:
  void need(std::size_t count) {
    if (size_ - pos_ < count) {
      throw FormatError("checkpoint truncated: " + path_.string());
    }
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::filesystem::path path_;
};

void put_layers(std::vector<unsigned char>& out, const std::vector<AffineLayer>& layers) {
  for (const AffineLayer& l : layers) {
    put_u32(out, static_cast<std::uint32_t>(l.out_dim()));
    put_u32(out, static_cast<std::uint32_t>(l.in_dim()));
    for (double w : l.weights.data()) put_f64(out, w);
    for (double b : l.bias) put_f64(out, b);
  }
}

std::vector<AffineLayer> read_layers(ByteReader& r, std::uint32_t count) {
  std::vector<AffineLayer> layers(count);
  for (AffineLayer& l : layers) {
    const std::uint32_t out_dim = r.u32();
    const std::uint32_t in_dim = r.u32();
    l.weights = Matrix(out_dim, in_dim);
    for (double& w : l.weights.data()) w = r.f64();
    l.bias.resize(out_dim);
    for (double& b : l.bias) b = r.f64();
  }
  return layers;
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const FFModel& model) {
  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + sizeof(kMagic));
  put_u32(bytes, kVersion);
  put_u32(bytes, kKindFF);
  put_u32(bytes, static_cast<std::uint32_t>(model.layers.size()));
  put_u32(bytes, static_cast<std::uint32_t>(model.num_labels));
  put_f64(bytes, model.theta);
  put_layers(bytes, model.layers);
  write_file(path, bytes);
}

void save_checkpoint(const std::filesystem::path& path, const BPModel& model) {
  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + sizeof(kMagic));
  put_u32(bytes, kVersion);
  put_u32(bytes, kKindBP);
  put_u32(bytes, static_cast<std::uint32_t>(model.layers.size()));
  put_u32(bytes, static_cast<std::uint32_t>(model.num_labels));
  put_f64(bytes, 0.0);
  put_layers(bytes, model.layers);
  write_file(path, bytes);
}

void save_checkpoint(const std::filesystem::path& path, const AnyModel& model) {
  std::visit([&](const auto& m) { save_checkpoint(path, m); }, model);
}

AnyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());

  ByteReader r(bytes.data(), bytes.size(), path);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a checkpoint (bad magic): " + path.string());
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + ": " +
                      path.string());
  }
  const std::uint32_t kind = r.u32();
  const std::uint32_t layer_count = r.u32();
  const std::uint32_t num_labels = r.u32();
  const double theta = r.f64();

  if (kind == kKindFF) {
    FFModel m;
    m.theta = theta;
    m.num_labels = static_cast<int>(num_labels);
    m.layers = read_layers(r, layer_count);
    if (!r.exhausted()) throw FormatError("trailing bytes in checkpoint: " + path.string());
    return m;
  }
  if (kind == kKindBP) {
    BPModel m;
    m.num_labels = static_cast<int>(num_labels);
    m.layers = read_layers(r, layer_count);
    if (!r.exhausted()) throw FormatError("trailing bytes in checkpoint: " + path.string());
    return m;
  }
  throw FormatError("unknown model kind " + std::to_string(kind) + ": " + path.string());
}

}  // namespace fedfwd
