// Copyright (c) 2026 OrthoSpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "orthospot/dataset/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "orthospot/base/error.h"

namespace orthospot {

namespace {

uint32_t ReadU32(const char* p) {
  return static_cast<uint32_t>(static_cast<uint8_t>(p[0])) |
         static_cast<uint32_t>(static_cast<uint8_t>(p[1])) << 8 |
         static_cast<uint32_t>(static_cast<uint8_t>(p[2])) << 16 |
         static_cast<uint32_t>(static_cast<uint8_t>(p[3])) << 24;
}

uint16_t ReadU16(const char* p) {
  return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                               static_cast<uint8_t>(p[1]) << 8);
}

void PutU32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

void PutU16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

struct Layout {
  int sample_rate = 0;
  std::streamoff data_offset = 0;
  uint32_t data_bytes = 0;
};

// Walks the chunk list up to "data", validating "fmt ".
Layout ParseHeader(std::istream& in, const std::string& path) {
  char riff[12];
  if (!in.read(riff, 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw DataError(path + ": not a RIFF/WAVE file");
  }
  Layout layout;
  bool have_fmt = false;
  char chunk[8];
  while (in.read(chunk, 8)) {
    uint32_t size = ReadU32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(path + ": short fmt chunk");
      std::vector<char> fmt(size);
      if (!in.read(fmt.data(), size)) throw DataError(path + ": truncated fmt chunk");
      uint16_t format = ReadU16(fmt.data());
      uint16_t channels = ReadU16(fmt.data() + 2);
      uint32_t rate = ReadU32(fmt.data() + 4);
      uint16_t bits = ReadU16(fmt.data() + 14);
      if (format != 1 || bits != 16) throw DataError(path + ": not 16-bit PCM");
      if (channels != 1) throw DataError(path + ": not mono");
      if (rate != kSampleRate) {
        throw DataError(path + ": sample rate " + std::to_string(rate) +
                        " Hz, expected 16000");
      }
      layout.sample_rate = static_cast<int>(rate);
      have_fmt = true;
      if (size & 1) in.ignore(1);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw DataError(path + ": data chunk before fmt chunk");
      layout.data_offset = in.tellg();
      layout.data_bytes = size;
      return layout;
    } else {
      in.ignore(static_cast<std::streamsize>(size + (size & 1)));
    }
  }
  throw DataError(path + ": no data chunk");
}

}  // namespace

WavData ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open");
  Layout layout = ParseHeader(in, path);
  std::vector<char> raw(layout.data_bytes);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  // Some GSCD files declare a longer data chunk than they hold.
  std::size_t got = static_cast<std::size_t>(in.gcount()) / 2;
  WavData wav;
  wav.sample_rate = layout.sample_rate;
  wav.samples.resize(got);
  for (std::size_t i = 0; i < got; ++i) {
    auto v = static_cast<int16_t>(ReadU16(raw.data() + 2 * i));
    wav.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return wav;
}

bool ProbeWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  try {
    ParseHeader(in, path);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

void WriteWav(const std::string& path, std::span<const float> samples,
              int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError(path + ": cannot create");
  const auto data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  PutU32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutU16(os, 1);
  PutU16(os, 1);
  PutU32(os, static_cast<uint32_t>(sample_rate));
  PutU32(os, static_cast<uint32_t>(sample_rate * 2));
  PutU16(os, 2);
  PutU16(os, 16);
  os.write("data", 4);
  PutU32(os, data_bytes);
  for (float s : samples) {
    double scaled = std::round(static_cast<double>(s) * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    PutU16(os, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  if (!os) throw DataError(path + ": write failed");
}

}  // namespace orthospot
