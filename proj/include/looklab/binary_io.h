/* Copyright 2026 The LookLab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LOOKLAB_BINARY_IO_H_
#define LOOKLAB_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "looklab/errors.h"

namespace looklab::bin {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_f32s(std::ostream& out, const float* data, size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

inline uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DecodeError("unexpected end of binary record");
  }
  return v;
}

inline std::string read_string(std::istream& in, uint32_t limit = 1u << 24) {
  const uint32_t n = read_u32(in);
  if (n > limit) throw DecodeError("string field too long");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw DecodeError("truncated string field");
  return s;
}

inline std::vector<float> read_f32s(std::istream& in, uint32_t n) {
  std::vector<float> v(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n) * 4)) {
    throw DecodeError("truncated float32 payload");
  }
  return v;
}

}  // namespace looklab::bin

#endif  // LOOKLAB_BINARY_IO_H_
