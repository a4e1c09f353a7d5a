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

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "rfxg/convnet.hpp"
#include "rfxg/error.hpp"

namespace rfxg {
namespace {

constexpr const char* kNetMagic = "RFXG-NET 1";

}  // namespace

void write_checkpoint(std::ostream& out, const ToyConvNet& model) {
  out << kNetMagic << '\n' << model.architecture().descriptor() << '\n';
  model.parameters().for_each_tensor([&](const std::vector<double>& tensor) {
    for (double v : tensor) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      char bytes[4];
      for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
      out.write(bytes, 4);
    }
  });
  if (!out) throw FormatError("failed writing checkpoint");
}

ToyConvNet read_checkpoint(std::istream& in) {
  std::string magic, descriptor;
  if (!std::getline(in, magic) || magic != kNetMagic) {
    throw FormatError("missing RFXG-NET 1 magic line");
  }
  if (!std::getline(in, descriptor)) throw FormatError("missing architecture descriptor");
  ToyConvNet model(Architecture::parse(descriptor));
  model.mutable_parameters().for_each_tensor([&](std::vector<double>& tensor) {
    for (double& v : tensor) {
      unsigned char bytes[4];
      if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw FormatError("checkpoint parameter payload is truncated");
      }
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
      v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw FormatError("checkpoint holds a non-finite parameter");
    }
  });
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after checkpoint parameters");
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const ToyConvNet& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open {} for writing", path.string()));
  write_checkpoint(out, model);
}

ToyConvNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_checkpoint(in);
}

}  // namespace rfxg
