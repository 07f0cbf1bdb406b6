#include "csk/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "csk/error.hpp"

namespace csk {
namespace {

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}
void put16(std::ofstream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

RawSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  auto fail = [&](const std::string& what) { return DataError(path.string() + ": " + what); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    if (pos + 8 + size > bytes.size()) throw fail("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw fail("short fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == 0xFFFE && size >= 40) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (format == 0) throw fail("missing fmt chunk");
  if (data == nullptr) throw fail("missing data chunk");
  if (channels != 1) throw fail("expected mono audio, found " + std::to_string(channels) + " channels");
  if (rate == 0) throw fail("zero sample rate");

  RawSignal sig;
  sig.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    sig.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
      sig.samples[i] = static_cast<std::int16_t>(le16(data + 2 * i)) / 32768.0;
  } else if (format == 3 && bits == 32) {
    sig.samples.resize(data_size / 4);
    for (std::size_t i = 0; i < sig.samples.size(); ++i) {
      const std::uint32_t raw = le32(data + 4 * i);
      float f;
      std::memcpy(&f, &raw, 4);
      sig.samples[i] = f;
    }
  } else {
    throw fail("unsupported sample format (need 16-bit PCM or 32-bit float)");
  }
  if (sig.samples.empty()) throw fail("no samples");
  return sig;
}

void write_wav(const std::filesystem::path& path, const RawSignal& signal) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  const auto data_size = static_cast<std::uint32_t>(signal.samples.size() * 4);
  out.write("RIFF", 4);
  put32(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, 3);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put32(out, static_cast<std::uint32_t>(signal.sample_rate) * 4);
  put16(out, 4);
  put16(out, 32);
  out.write("data", 4);
  put32(out, data_size);
  for (double v : signal.samples) {
    const auto f = static_cast<float>(v);
    std::uint32_t raw;
    std::memcpy(&raw, &f, 4);
    put32(out, raw);
  }
}

}  // namespace csk
