#include "bwe/data/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "bwe/error.hpp"

namespace bwe {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd() % 1000000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v));
  u8(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  if (n > remaining())
    throw FormatError(what_ + ": truncated at byte " + std::to_string(pos_) + " (need " +
                      std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = raw(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  auto b = raw(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::str(std::size_t n) {
  auto b = raw(n);
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

Waveform decode_wav(std::span<const std::uint8_t> bytes, const std::string& what) {
  ByteReader r(bytes, what);
  if (r.str(4) != "RIFF") throw FormatError(what + ": not a RIFF file");
  r.u32();
  if (r.str(4) != "WAVE") throw FormatError(what + ": RIFF type is not WAVE");
  bool have_fmt = false;
  std::uint32_t rate = 0;
  while (r.remaining() >= 8) {
    const std::string id = r.str(4);
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError(what + ": fmt chunk too short");
      ByteReader f(r.raw(size), what);
      const std::uint16_t format = f.u16();
      const std::uint16_t channels = f.u16();
      rate = f.u32();
      f.u32();
      f.u16();
      const std::uint16_t bits = f.u16();
      if (format != 1 && format != 0xFFFE)
        throw FormatError(what + ": unsupported WAV format tag " + std::to_string(format) +
                          " (need PCM)");
      if (channels != 1)
        throw FormatError(what + ": " + std::to_string(channels) + " channels (need mono)");
      if (bits != 16)
        throw FormatError(what + ": " + std::to_string(bits) + "-bit samples (need 16-bit)");
      if (rate == 0) throw FormatError(what + ": zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(what + ": data chunk before fmt chunk");
      if (size % 2) throw FormatError(what + ": odd data chunk size");
      auto d = r.raw(size);
      std::vector<double> s(size / 2);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto pcm = static_cast<std::int16_t>(d[2 * i] | (d[2 * i + 1] << 8));
        s[i] = pcm / 32768.0;
      }
      return Waveform(std::move(s), static_cast<int>(rate));
    } else {
      r.skip(size + (size & 1));
    }
  }
  throw FormatError(what + ": no data chunk");
}

std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  ByteWriter b;
  const auto data_bytes = static_cast<std::uint32_t>(2 * w.size());
  b.str("RIFF");
  b.u32(36 + data_bytes);
  b.str("WAVE");
  b.str("fmt ");
  b.u32(16);
  b.u16(1);
  b.u16(1);
  b.u32(static_cast<std::uint32_t>(w.sample_rate()));
  b.u32(static_cast<std::uint32_t>(w.sample_rate()) * 2);
  b.u16(2);
  b.u16(16);
  b.str("data");
  b.u32(data_bytes);
  for (double s : w.samples()) {
    const double v = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    b.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return std::move(b.bytes());
}

Waveform load_wav(const fs::path& path) { return decode_wav(read_file(path), path.string()); }

void save_wav(const fs::path& path, const Waveform& w) { write_file_atomic(path, encode_wav(w)); }

ConditionTrack decode_features(std::span<const std::uint8_t> bytes, const std::string& what) {
  ByteReader r(bytes, what);
  if (r.remaining() < 4 || r.str(4) != "BWEF") throw FormatError(what + ": bad magic (want BWEF)");
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw FormatError(what + ": unsupported feature file version " + std::to_string(version));
  const std::uint32_t dim = r.u32();
  const std::uint32_t shift = r.u32();
  const std::uint32_t frames = r.u32();
  if (dim == 0 && frames != 0) throw FormatError(what + ": zero dimension with frames");
  const std::uint64_t count = std::uint64_t{dim} * frames;
  if (count * 4 != r.remaining())
    throw FormatError(what + ": expected " + std::to_string(count * 4) + " payload bytes, found " +
                      std::to_string(r.remaining()));
  ConditionTrack t;
  t.dim = dim;
  t.frame_shift_samples = shift;
  t.frames.resize(count);
  for (auto& v : t.frames) {
    v = r.f32();
    if (!std::isfinite(v)) throw FormatError(what + ": non-finite feature value");
  }
  return t;
}

std::vector<std::uint8_t> encode_features(const ConditionTrack& t) {
  ByteWriter b;
  b.str("BWEF");
  b.u32(1);
  b.u32(static_cast<std::uint32_t>(t.dim));
  b.u32(t.frame_shift_samples);
  b.u32(static_cast<std::uint32_t>(t.n_frames()));
  for (float v : t.frames) b.f32(v);
  return std::move(b.bytes());
}

ConditionTrack load_features(const fs::path& path) {
  return decode_features(read_file(path), path.string());
}

void save_features(const fs::path& path, const ConditionTrack& t) {
  write_file_atomic(path, encode_features(t));
}

}  // namespace bwe
