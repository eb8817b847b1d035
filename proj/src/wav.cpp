#include "eamon/wav.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string_view>

#include "eamon/error.hpp"

namespace eamon {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16_at(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(b[off]) | (std::to_integer<unsigned>(b[off + 1]) << 8));
}

std::uint32_t u32_at(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint32_t>(u16_at(b, off)) | (static_cast<std::uint32_t>(u16_at(b, off + 2)) << 16);
}

bool tag_at(std::span<const std::byte> b, std::size_t off, std::string_view tag) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::to_integer<char>(b[off + i]) != tag[i]) return false;
  }
  return true;
}

class ByteWriter {
 public:
  void tag(std::string_view t) {
    for (char c : t) out.push_back(static_cast<std::byte>(c));
  }
  void u16(std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xFF));
    out.push_back(static_cast<std::byte>(v >> 8));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v & 0xFFFF));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  std::vector<std::byte> out;
};

struct FormatChunk {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_format(std::span<const std::byte> b, std::size_t body, std::uint32_t size) {
  if (size < 16) {
    throw Error(Errc::UnsupportedFormat, fmt::format("fmt chunk at byte {} is {} bytes, need 16", body - 8, size));
  }
  FormatChunk f;
  f.tag = u16_at(b, body);
  f.channels = u16_at(b, body + 2);
  f.sample_rate = u32_at(b, body + 4);
  f.block_align = u16_at(b, body + 12);
  f.bits = u16_at(b, body + 14);

  if (f.tag == kFormatExtensible) {
    throw Error(Errc::UnsupportedFormat, fmt::format("extensible WAVE format at byte {} is not supported", body));
  }
  if (f.tag != kFormatPcm && f.tag != kFormatFloat) {
    throw Error(Errc::UnsupportedFormat, fmt::format("format tag {} at byte {} is not PCM or IEEE float", f.tag, body));
  }
  if (f.channels != 1) {
    if (f.channels == 0) throw Error(Errc::UnsupportedFormat, fmt::format("zero channels at byte {}", body + 2));
    throw Error(Errc::MultiChannel,
                fmt::format("{} channels declared at byte {}; only mono recordings are accepted", f.channels, body + 2));
  }
  if (f.sample_rate == 0) throw Error(Errc::UnsupportedFormat, fmt::format("zero sample rate at byte {}", body + 4));
  const bool ok = (f.tag == kFormatPcm && f.bits == 16) || (f.tag == kFormatFloat && f.bits == 32);
  if (!ok) {
    throw Error(Errc::UnsupportedFormat,
                fmt::format("{}-bit {} samples at byte {} are not supported (16-bit PCM or 32-bit float only)",
                            f.bits, f.tag == kFormatPcm ? "integer" : "float", body + 14));
  }
  if (f.block_align != f.bits / 8) {
    throw Error(Errc::UnsupportedFormat, fmt::format("block align {} at byte {} does not match {}-bit mono",
                                                     f.block_align, body + 12, f.bits));
  }
  return f;
}

}  // namespace

SampledSignal decode_wav(std::span<const std::byte> b, AudioFileMeta* meta) {
  if (b.size() < 12) throw Error(Errc::NotRiff, fmt::format("{} bytes is too short for a RIFF header", b.size()));
  if (!tag_at(b, 0, "RIFF")) throw Error(Errc::NotRiff, "missing 'RIFF' tag at byte 0");
  if (!tag_at(b, 8, "WAVE")) throw Error(Errc::NotRiff, "missing 'WAVE' form type at byte 8");

  std::optional<FormatChunk> format;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    const std::uint32_t size = u32_at(b, off + 4);
    const std::size_t body = off + 8;
    const std::size_t available = b.size() - body;

    if (tag_at(b, off, "fmt ")) {
      if (size > available) {
        throw Error(Errc::TruncatedData,
                    fmt::format("fmt chunk at byte {} declares {} bytes, {} remain", off, size, available));
      }
      format = parse_format(b, body, size);
    } else if (tag_at(b, off, "data")) {
      if (!format) throw Error(Errc::UnsupportedFormat, fmt::format("data chunk at byte {} precedes fmt", off));
      if (size > available) {
        throw Error(Errc::TruncatedData,
                    fmt::format("data chunk at byte {} declares {} bytes ({} frames) but only {} bytes follow", off,
                                size, size / format->block_align, available));
      }
      if (size % format->block_align != 0) {
        throw Error(Errc::TruncatedData, fmt::format("data chunk at byte {} holds {} bytes, not a whole number of "
                                                     "{}-byte frames",
                                                     off, size, format->block_align));
      }
      const std::size_t frames = size / format->block_align;
      std::vector<double> samples(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        if (format->tag == kFormatPcm) {
          samples[i] = static_cast<double>(static_cast<std::int16_t>(u16_at(b, body + 2 * i))) / kPcm16FullScale;
        } else {
          samples[i] = static_cast<double>(std::bit_cast<float>(u32_at(b, body + 4 * i)));
        }
      }
      if (meta) {
        *meta = {format->sample_rate, format->channels,
                 format->tag == kFormatPcm ? SampleFormat::Pcm16 : SampleFormat::Float32, frames};
      }
      return SampledSignal(std::move(samples), static_cast<double>(format->sample_rate));
    }
    // Unknown chunks are skipped; RIFF pads odd-sized bodies to an even length.
    off = body + size + (size & 1u);
  }
  throw Error(Errc::TruncatedData, fmt::format("no data chunk before end of file at byte {}", b.size()));
}

SampledSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoFailure, "read of " + path.string() + " failed");
  return decode_wav(std::as_bytes(std::span(raw)));
}

std::vector<std::byte> encode_wav(const SampledSignal& signal, SampleFormat format, WriteReport* report) {
  const double fs = signal.sample_rate_hz();
  if (fs != std::floor(fs) || fs > 4294967295.0) {
    throw Error(Errc::InvalidArgument, fmt::format("WAV needs an integer sample rate, got {}", fs));
  }
  const auto rate = static_cast<std::uint32_t>(fs);
  const std::uint16_t bytes_per_sample = format == SampleFormat::Pcm16 ? 2 : 4;
  const auto frames = signal.size();
  const auto data_size = static_cast<std::uint32_t>(frames * bytes_per_sample);
  const bool is_float = format == SampleFormat::Float32;
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;

  ByteWriter w;
  w.out.reserve(44 + fact_size + data_size);
  w.tag("RIFF");
  w.u32(4 + (8 + fmt_size) + fact_size + (8 + data_size));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(fmt_size);
  w.u16(is_float ? kFormatFloat : kFormatPcm);
  w.u16(1);
  w.u32(rate);
  w.u32(rate * bytes_per_sample);
  w.u16(bytes_per_sample);
  w.u16(static_cast<std::uint16_t>(bytes_per_sample * 8));
  if (is_float) {
    w.u16(0);
    w.tag("fact");
    w.u32(4);
    w.u32(static_cast<std::uint32_t>(frames));
  }
  w.tag("data");
  w.u32(data_size);

  std::size_t clipped = 0;
  for (double v : signal.samples()) {
    if (is_float) {
      w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      continue;
    }
    if (v > 1.0 || v < -1.0) ++clipped;
    const double q = std::clamp(std::round(v * kPcm16FullScale), -32768.0, 32767.0);
    w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (report) report->clipped = clipped;
  return std::move(w.out);
}

WriteReport write_wav(const SampledSignal& signal, const std::filesystem::path& path, SampleFormat format) {
  WriteReport report;
  const auto bytes = encode_wav(signal, format, &report);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write to " + path.string() + " failed");
  return report;
}

}  // namespace eamon
