#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "eamon/signal.hpp"

namespace eamon {

enum class SampleFormat { Pcm16, Float32 };

struct AudioFileMeta {
  std::uint32_t sample_rate_hz = 0;
  std::uint16_t channels = 0;
  SampleFormat format = SampleFormat::Pcm16;
  std::size_t frame_count = 0;
};

/// Full scale of 16-bit PCM: -32768 maps to -1.0, +32767 to 32767/32768.
inline constexpr double kPcm16FullScale = 32768.0;

/// Mono RIFF/WAVE, 16-bit integer PCM or 32-bit IEEE float. Unknown chunks are skipped.
/// Throws NotRiff, UnsupportedFormat, MultiChannel, TruncatedData (messages carry byte
/// offsets) and IoFailure.
SampledSignal read_wav(const std::filesystem::path& path);
SampledSignal decode_wav(std::span<const std::byte> bytes, AudioFileMeta* meta = nullptr);

struct WriteReport {
  std::size_t clipped = 0;  ///< samples outside [-1, 1] saturated to full scale
};

WriteReport write_wav(const SampledSignal& signal, const std::filesystem::path& path, SampleFormat format);
std::vector<std::byte> encode_wav(const SampledSignal& signal, SampleFormat format, WriteReport* report = nullptr);

}  // namespace eamon
