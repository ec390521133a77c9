#include "adc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace adc {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'C', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, ModelParams& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);

  const std::vector<TensorRef> tensors = model_tensors(m);
  out.write(kMagic, 4);
  write_pod<uint32_t>(out, kVersion);
  write_pod<uint64_t>(out, m.cfg.hash());
  write_pod<uint32_t>(out, static_cast<uint32_t>(m.cfg.n_classes));
  write_pod<uint32_t>(out, static_cast<uint32_t>(tensors.size()));

  std::vector<float> buf;
  for (const TensorRef& t : tensors) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
    for (long dim : t.shape) write_pod<uint64_t>(out, static_cast<uint64_t>(dim));
    buf.resize(static_cast<size_t>(t.size));
    for (long i = 0; i < t.size; ++i) buf[i] = static_cast<float>(t.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

ModelParams load_checkpoint(const std::string& path, const ModelConfig& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  if (read_pod<uint32_t>(in) != kVersion) {
    throw std::runtime_error("unsupported checkpoint version: " + path);
  }
  if (read_pod<uint64_t>(in) != expected.hash()) {
    throw std::runtime_error("checkpoint was written with a different model config: " + path);
  }
  if (read_pod<uint32_t>(in) != static_cast<uint32_t>(expected.n_classes)) {
    throw std::runtime_error("checkpoint class count mismatch: " + path);
  }

  ModelParams m = zeros_like(ModelParams{.cfg = expected});
  const std::vector<TensorRef> tensors = model_tensors(m);
  const uint32_t n_tensors = read_pod<uint32_t>(in);
  if (n_tensors != tensors.size()) {
    throw std::runtime_error("checkpoint tensor count mismatch: " + path);
  }

  std::vector<float> buf;
  for (const TensorRef& t : tensors) {
    const uint32_t name_len = read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != t.name) {
      throw std::runtime_error("checkpoint tensor order mismatch at '" + name + "': " + path);
    }
    const uint32_t ndim = read_pod<uint32_t>(in);
    if (ndim != t.shape.size()) {
      throw std::runtime_error("checkpoint rank mismatch for '" + name + "': " + path);
    }
    for (long dim : t.shape) {
      if (read_pod<uint64_t>(in) != static_cast<uint64_t>(dim)) {
        throw std::runtime_error("checkpoint shape mismatch for '" + name + "': " + path);
      }
    }
    buf.resize(static_cast<size_t>(t.size));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated checkpoint tensor '" + name + "': " + path);
    for (long i = 0; i < t.size; ++i) t.data[i] = buf[i];
  }
  return m;
}

}  // namespace adc
