#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bwe/condition_track.hpp"
#include "bwe/dsp/waveform.hpp"

namespace bwe {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// RIFF/WAVE, 16-bit signed PCM, mono. Samples map as s = pcm / 32768; on
// write pcm = round(s * 32768) clamped to the int16 range, which makes
// load(save(load(f))) reproduce the PCM of f exactly.
Waveform decode_wav(std::span<const std::uint8_t> bytes, const std::string& what = "wav");
std::vector<std::uint8_t> encode_wav(const Waveform& w);
Waveform load_wav(const std::filesystem::path& path);
void save_wav(const std::filesystem::path& path, const Waveform& w);

// Feature file: "BWEF", u32 version 1, u32 dim, u32 frame shift, u32 frame
// count, then float32 frames row-major. Little-endian.
ConditionTrack decode_features(std::span<const std::uint8_t> bytes,
                               const std::string& what = "features");
std::vector<std::uint8_t> encode_features(const ConditionTrack& t);
ConditionTrack load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const ConditionTrack& t);

// Little-endian primitives shared by the binary formats.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void str(const std::string& s) { raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  std::span<const std::uint8_t> raw(std::size_t n);
  std::string str(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void skip(std::size_t n) { raw(n); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace bwe
