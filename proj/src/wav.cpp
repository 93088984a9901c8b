#include "avsi/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "avsi/dsp.hpp"

namespace avsi {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path);

  char id[4];
  in.read(id, 4);
  if (std::strncmp(id, "RIFF", 4) != 0) throw std::runtime_error("not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(id, 4);
  if (std::strncmp(id, "WAVE", 4) != 0) throw std::runtime_error("not a WAVE file: " + path);

  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  std::vector<int16_t> data;
  bool have_fmt = false, have_data = false;

  while (in && !(have_fmt && have_data)) {
    in.read(id, 4);
    uint32_t chunk_size = read_u32(in);
    if (!in) break;
    if (std::strncmp(id, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::strncmp(id, "data", 4) == 0) {
      data.resize(chunk_size / 2);
      in.read(reinterpret_cast<char*>(data.data()), chunk_size);
      have_data = true;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }

  if (!have_fmt || !have_data) throw std::runtime_error("incomplete wav file: " + path);
  if (format != 1 || bits != 16) throw std::runtime_error("wav must be 16-bit PCM: " + path);
  if (channels != 1) throw std::runtime_error("wav must be mono: " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(data.size());
  for (size_t i = 0; i < data.size(); ++i) w.samples[i] = data[i] / 32768.0;
  if (w.sample_rate != kSampleRate) w = resample(w, kSampleRate);
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.sample_rate != kSampleRate)
    throw std::invalid_argument("write_wav: expects 16 kHz waveform");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write wav file: " + path);

  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_bytes = n * 2;
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(w.sample_rate));
  write_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (double s : w.samples) {
    // symmetric with the read-side /32768 so a round trip stays within half a step
    double scaled = std::round(s * 32768.0);
    int16_t q = static_cast<int16_t>(std::min(32767.0, std::max(-32768.0, scaled)));
    char b[2] = {static_cast<char>(q & 0xff), static_cast<char>((q >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw std::runtime_error("failed writing wav file: " + path);
}

}  // namespace avsi
