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

#include "looklab/nn/checkpoint.h"

#include <fstream>

#include "looklab/binary_io.h"
#include "looklab/errors.h"

namespace looklab::nn {
namespace {
constexpr char kMagic[8] = {'L', 'O', 'O', 'K', 'L', 'A', 'B', '\x01'};
}

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::string& config_json, const std::vector<Param*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  bin::write_u32(out, kCheckpointVersion);
  bin::write_string(out, kind);
  bin::write_string(out, config_json);
  bin::write_u32(out, static_cast<uint32_t>(params.size()));
  for (const Param* p : params) {
    bin::write_u32(out, static_cast<uint32_t>(p->value.size()));
    bin::write_f32s(out, p->value.data(), p->value.size());
  }
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DecodeError("'" + path + "' is not a looklab checkpoint");
  }
  const uint32_t version = bin::read_u32(in);
  if (version != kCheckpointVersion) {
    throw DecodeError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.kind = bin::read_string(in);
  ckpt.config_json = bin::read_string(in);
  const uint32_t n = bin::read_u32(in);
  for (uint32_t i = 0; i < n; ++i) {
    const uint32_t len = bin::read_u32(in);
    if (len > (1u << 28)) throw DecodeError("parameter blob too large");
    ckpt.blobs.push_back(bin::read_f32s(in, len));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, const std::vector<Param*>& params) {
  if (ckpt.blobs.size() != params.size()) {
    throw DecodeError("checkpoint has " + std::to_string(ckpt.blobs.size()) +
                      " parameter blobs, model expects " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (ckpt.blobs[i].size() != params[i]->value.size()) {
      throw DecodeError("checkpoint parameter " + std::to_string(i) + " has wrong size");
    }
    params[i]->value = ckpt.blobs[i];
  }
}

}  // namespace looklab::nn
