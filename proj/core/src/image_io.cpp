/*
 * Copyright 2026 The rfxg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rfxg/image_io.hpp"

#include <bit>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include <fmt/format.h>

#include "rfxg/error.hpp"

namespace rfxg {
namespace {

constexpr const char* kSaliencyMagic = "RFXG-SAL 1";

void put_f32_le(std::ostream& out, float value) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

float get_f32_le(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw FormatError("truncated float32 payload");
  }
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw FormatError("unexpected end of PNM header");
  return token;
}

std::size_t parse_size(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(token, &pos);
    if (pos != token.size()) throw FormatError("");
    return v;
  } catch (const std::exception&) {
    throw FormatError(fmt::format("invalid {} '{}'", what, token));
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

void write_saliency(std::ostream& out, const SaliencyMap& map) {
  out << kSaliencyMagic << '\n' << map.height() << ' ' << map.width() << '\n';
  for (double v : map.values()) put_f32_le(out, static_cast<float>(v));
  if (!out) throw FormatError("failed writing saliency map");
}

SaliencyMap read_saliency(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kSaliencyMagic) {
    throw FormatError("missing RFXG-SAL 1 magic line");
  }
  std::string dims;
  if (!std::getline(in, dims)) throw FormatError("missing saliency dimensions");
  std::size_t h = 0, w = 0;
  char trailing = 0;
  if (std::sscanf(dims.c_str(), "%zu %zu %c", &h, &w, &trailing) != 2 || h == 0 ||
      w == 0) {
    throw FormatError(fmt::format("bad saliency dimension line '{}'", dims));
  }
  std::vector<double> values(h * w);
  for (double& v : values) v = get_f32_le(in);
  try {
    return SaliencyMap(h, w, std::move(values));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

void save_saliency(const std::filesystem::path& path, const SaliencyMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open {} for writing", path.string()));
  write_saliency(out, map);
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_saliency(in);
}

void write_pnm(std::ostream& out, const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError("PNM output needs 1 or 3 channels");
  }
  out << (image.channels() == 3 ? "P6" : "P5") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<char> bytes(image.size());
  const auto data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes[i] = static_cast<char>(quantize(data[i]));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing PNM image");
}

ImageTensor read_pnm(std::istream& in) {
  const std::string magic = pnm_token(in);
  std::size_t channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw FormatError(fmt::format("unsupported PNM magic '{}'", magic));
  }
  const std::size_t width = parse_size(pnm_token(in), "width");
  const std::size_t height = parse_size(pnm_token(in), "height");
  const std::size_t maxval = parse_size(pnm_token(in), "maxval");
  if (maxval != 255) throw FormatError("only maxval 255 is supported");
  if (width == 0 || height == 0) throw FormatError("empty PNM image");
  // pnm_token consumed exactly one whitespace byte after maxval.
  std::vector<unsigned char> bytes(width * height * channels);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError("truncated PNM raster");
  }
  std::vector<double> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) data[i] = bytes[i] / 255.0;
  return ImageTensor(height, width, channels, std::move(data));
}

void save_pnm(const std::filesystem::path& path, const ImageTensor& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open {} for writing", path.string()));
  write_pnm(out, image);
}

ImageTensor load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_pnm(in);
}

ImageTensor quantize_8bit(const ImageTensor& image) {
  std::vector<double> data(image.data().begin(), image.data().end());
  for (double& v : data) v = quantize(v) / 255.0;
  return ImageTensor(image.height(), image.width(), image.channels(), std::move(data));
}

}  // namespace rfxg
