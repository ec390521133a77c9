#include "adc/audio_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace adc {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44) throw std::runtime_error("truncated WAV header: " + path);
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  }

  // Walk chunks; require one fmt and one data chunk.
  size_t pos = 12;
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    if (pos + 8 + len > bytes.size()) {
      throw std::runtime_error("truncated WAV chunk '" + std::string(id, 4) + "': " + path);
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw std::runtime_error("truncated fmt chunk: " + path);
      const unsigned char* f = bytes.data() + pos + 8;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr) throw std::runtime_error("missing fmt/data chunk: " + path);
  if (format != 1) throw std::runtime_error("unsupported WAV encoding (PCM required): " + path);
  if (channels != 1) throw std::runtime_error("unsupported channel count (mono required): " + path);
  if (bits != 16) throw std::runtime_error("unsupported sample width (16-bit required): " + path);
  if (sample_rate == 0) throw std::runtime_error("invalid sample rate: " + path);
  if (data_len == 0) throw std::runtime_error("empty data chunk: " + path);
  if (data_len % 2 != 0) throw std::runtime_error("odd data chunk size: " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  w.samples.resize(data_len / 2);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const int16_t s = static_cast<int16_t>(data[2 * i] | data[2 * i + 1] << 8);
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.samples.empty()) throw std::runtime_error("refusing to write empty waveform: " + path);
  const uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16(out, 2);                                         // block align
  put_u16(out, 16);                                        // bits
  out += "data";
  put_u32(out, data_len);
  for (double v : w.samples) {
    double c = std::min(1.0, std::max(-1.0, v));
    int q = static_cast<int>(std::lrint(c * 32768.0));
    q = std::min(32767, std::max(-32768, q));
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

}  // namespace adc
