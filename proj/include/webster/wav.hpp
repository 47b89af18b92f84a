#pragma once

// 16-bit PCM mono RIFF/WAVE reading and writing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "webster/errors.hpp"
#include "webster/signal.hpp"

namespace webster {

namespace detail {

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

inline std::int16_t quantize_pcm16(double v) {
  const double s = std::round(std::clamp(v, -1.0, 1.0) * 32767.0);
  return static_cast<std::int16_t>(s);
}

/// Samples are clipped to [-1, 1] and rounded to 16 bits.
inline void write_wav(const std::filesystem::path& path, const AudioSignal& a) {
  const auto rate = static_cast<std::uint32_t>(std::llround(a.fs));
  const auto data_bytes = static_cast<std::uint32_t>(a.size() * 2);
  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_bytes);
  for (double v : a.samples) detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(v)));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

/// Reads a 16-bit PCM WAV; multi-channel input is averaged to mono.
inline AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw IoError("'" + path.string() + "' is not a RIFF/WAVE file");

  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::uint32_t size = detail::get_u32(chunk + 4);
    if (pos + 8 + size > buf.size()) throw IoError("'" + path.string() + "' has a truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = detail::get_u16(chunk + 8);
      channels = detail::get_u16(chunk + 10);
      rate = detail::get_u32(chunk + 12);
      bits = detail::get_u16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (format != 1 || bits != 16 || channels == 0)
    throw IoError("'" + path.string() + "': only 16-bit PCM WAV is supported");
  if (data == nullptr) throw IoError("'" + path.string() + "' has no data chunk");

  const std::size_t frames = data_size / (2u * channels);
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
      acc += static_cast<std::int16_t>(detail::get_u16(data + 2 * (i * channels + c))) / 32767.0;
    samples[i] = acc / channels;
  }
  return AudioSignal(std::move(samples), static_cast<double>(rate));
}

/// Scales so the absolute peak sits at `dbfs` (default -1 dBFS).
inline AudioSignal peak_normalize(const AudioSignal& a, double dbfs = -1.0) {
  double peak = 0.0;
  for (double v : a.samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return a;
  return scaled(a, std::pow(10.0, dbfs / 20.0) / peak);
}

}  // namespace webster
