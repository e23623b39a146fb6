// Copyright 2026 The vtl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vtl/common/binary_io.hpp"
#include "vtl/error.hpp"
#include "vtl/gradcore/layers.hpp"
#include "vtl/gradcore/tensor.hpp"

namespace vtl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Ordered collection of named float tensors, stored in the CKPT format.
/// Non-tensor state (strings, small integers) is stored as float tensors;
/// see put_string / put_scalar.
class Checkpoint {
 public:
  void put(const std::string& name, Tensor<float> t) {
    if (name.empty() || name.size() > 0xffff) throw InvalidArgument("checkpoint: bad tensor name length");
    if (t.rank() > 255) throw InvalidArgument("checkpoint: rank too large for '" + name + "'");
    auto it = index_.find(name);
    if (it != index_.end()) {
      entries_[it->second].second = std::move(t);
      return;
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(t));
  }

  template <typename T>
  void put(const std::string& name, const Tensor<T>& t) {
    put(name, t.template cast<float>());
  }

  void put_scalar(const std::string& name, double v) { put(name, Tensor<float>({1}, {static_cast<float>(v)})); }

  /// Bytes stored one per element; exact for any byte value.
  void put_string(const std::string& name, std::string_view s) {
    std::vector<float> v(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = static_cast<float>(static_cast<unsigned char>(s[i]));
    put(name, Tensor<float>({s.size()}, std::move(v)));
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  const Tensor<float>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw DataError(where() + "missing tensor '" + name + "'");
    return entries_[it->second].second;
  }

  double get_scalar(const std::string& name) const {
    const auto& t = get(name);
    if (t.size() != 1) throw DataError(where() + "tensor '" + name + "' is not a scalar");
    return t[0];
  }

  std::string get_string(const std::string& name) const {
    const auto& t = get(name);
    std::string s(t.size(), '\0');
    for (std::size_t i = 0; i < t.size(); ++i) {
      const float v = t[i];
      if (!(v >= 0.0f && v <= 255.0f) || v != static_cast<float>(static_cast<int>(v))) {
        throw DataError(where() + "tensor '" + name + "' is not a byte string");
      }
      s[i] = static_cast<char>(static_cast<unsigned char>(v));
    }
    return s;
  }

  /// Stores parameter values under "<prefix><parameter name>".
  template <typename T>
  void put_params(const std::string& prefix, const ParamList<T>& params) {
    for (const auto* p : params) put(prefix + p->name, p->value);
  }

  /// Restores parameter values; shapes must match exactly.
  template <typename T>
  void load_params(const std::string& prefix, const ParamList<T>& params) const {
    for (auto* p : params) {
      const auto& t = get(prefix + p->name);
      if (t.shape() != p->value.shape()) {
        throw DataError(where() + "tensor '" + prefix + p->name + "' has shape " + shape_string(t.shape()) +
                        ", model expects " + shape_string(p->value.shape()));
      }
      p->value = t.template cast<T>();
      p->zero_grad();
    }
  }

  const std::vector<std::pair<std::string, Tensor<float>>>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

  std::vector<char> serialize() const {
    ByteWriter w;
    w.bytes("CKPT");
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [name, t] : entries_) {
      w.u16(static_cast<std::uint16_t>(name.size()));
      w.bytes(name);
      w.u8(static_cast<std::uint8_t>(t.rank()));
      for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
      w.f32s(t.data());
    }
    return w.buffer();
  }

  void save(const std::filesystem::path& path) const {
    ByteWriter w;
    const auto bytes = serialize();
    w.bytes(std::string_view(bytes.data(), bytes.size()));
    w.save(path);
  }

  static Checkpoint parse(ByteReader r) {
    Checkpoint c;
    c.source_ = r.source();
    if (r.bytes(4) != "CKPT") r.fail("bad magic (expected CKPT)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint16_t len = r.u16();
      std::string name = r.bytes(len);
      const std::uint8_t rank = r.u8();
      Shape shape(rank);
      for (auto& d : shape) d = r.u32();
      const std::size_t n = shape_size(shape);
      if (n * 4 > r.remaining()) r.fail("truncated data for tensor '" + name + "'");
      Tensor<float> t(shape);
      r.f32s(t.data());
      if (c.has(name)) r.fail("duplicate tensor '" + name + "'");
      c.put(name, std::move(t));
    }
    if (r.remaining() != 0) r.fail("trailing bytes after last tensor");
    return c;
  }

  static Checkpoint load(const std::filesystem::path& path) { return parse(ByteReader::from_file(path)); }

 private:
  std::vector<std::pair<std::string, Tensor<float>>> entries_;
  std::map<std::string, std::size_t> index_;
  std::string source_;

  std::string where() const { return source_.empty() ? "checkpoint: " : source_ + ": "; }
};

}  // namespace vtl
