// Copyright 2026 The dialect-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reader for the safetensors container: an 8-byte little-endian
// header length, a JSON header mapping tensor names to dtype/shape/offsets,
// then one contiguous byte buffer. Tensors are widened to float on load.

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/detail/io.hpp"
#include "dialect_audit/error.hpp"

namespace dialect_audit::bert {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

namespace detail {

inline float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000) << 16;
  std::uint32_t exp = (h >> 10) & 0x1F;
  std::uint32_t mant = h & 0x3FF;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      // subnormal: renormalise
      exp = 127 - 15 + 1;
      while ((mant & 0x400) == 0) {
        mant <<= 1;
        --exp;
      }
      mant &= 0x3FF;
      bits = sign | (exp << 23) | (mant << 13);
    }
  } else if (exp == 0x1F) {
    bits = sign | 0x7F800000 | (mant << 13);
  } else {
    bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(bits);
}

inline std::uint64_t read_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace detail

using TensorMap = std::map<std::string, Tensor, std::less<>>;

/// Parses a whole safetensors file. Any structural problem (short file,
/// bad header, offsets out of range, size/shape mismatch, unsupported dtype)
/// raises LoadError naming the path.
inline TensorMap load_safetensors(const std::string& path) {
  std::string raw;
  try {
    raw = dialect_audit::detail::read_file(path);
  } catch (const IoError& e) {
    throw LoadError(path, e.what());
  }
  static_assert(std::endian::native == std::endian::little,
                "tensor payloads are decoded assuming a little-endian host");
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  if (raw.size() < 8) throw LoadError(path, "file too short for a header");
  const std::uint64_t header_len = detail::read_le64(bytes);
  if (header_len > raw.size() - 8) {
    throw LoadError(path, "header length exceeds file size");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(std::string_view(raw).substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path, std::string("malformed header: ") + e.what());
  }
  if (!header.is_object()) throw LoadError(path, "header is not an object");
  const std::size_t base = 8 + header_len;
  const std::size_t payload = raw.size() - base;

  TensorMap tensors;
  for (const auto& [name, info] : header.items()) {
    if (name == "__metadata__") continue;
    try {
      const std::string dtype = info.at("dtype");
      Tensor t;
      t.shape = info.at("shape").get<std::vector<std::size_t>>();
      const auto offs = info.at("data_offsets").get<std::vector<std::size_t>>();
      if (offs.size() != 2 || offs[0] > offs[1] || offs[1] > payload) {
        throw LoadError(path, "tensor '" + name + "' has invalid offsets");
      }
      std::size_t width = 0;
      if (dtype == "F32") {
        width = 4;
      } else if (dtype == "F16" || dtype == "BF16") {
        width = 2;
      } else {
        throw LoadError(path, "tensor '" + name + "' has unsupported dtype " +
                                  dtype);
      }
      const std::size_t n = t.numel();
      if (offs[1] - offs[0] != n * width) {
        throw LoadError(path, "tensor '" + name +
                                  "' byte size does not match its shape");
      }
      const unsigned char* src = bytes + base + offs[0];
      t.data.resize(n);
      if (dtype == "F32") {
        std::memcpy(t.data.data(), src, n * 4);
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          std::uint16_t h;
          std::memcpy(&h, src + 2 * i, 2);
          t.data[i] = dtype == "F16"
                          ? detail::half_to_float(h)
                          : std::bit_cast<float>(std::uint32_t{h} << 16);
        }
      }
      tensors.emplace(name, std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path, "tensor '" + name + "': " + e.what());
    }
  }
  return tensors;
}

}  // namespace dialect_audit::bert
