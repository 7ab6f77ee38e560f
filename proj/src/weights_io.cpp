// Copyright 2026 The hemscast Authors
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

#include "hems/weights_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hems/errors.hpp"

namespace hems {

namespace {

constexpr char kMagic[8] = {'H', 'E', 'M', 'S', 'W', 'G', 'T', '\0'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    auto p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void uint(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void f64(double value) { uint(std::bit_cast<std::uint64_t>(value)); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t end) : in_(in), end_(end) {}
  template <typename T>
  T uint() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > end_) throw DataError("weight file: unexpected end of data");
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const ModelWeights& weights) {
  const ModelConfig& c = weights.config;
  ParameterLayout layout(c);
  if (weights.values.size() != layout.total()) {
    throw DataError("encode_weights: parameter count does not match config");
  }
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint<std::uint32_t>(kWeightFormatVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.input_window));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.horizon));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.hidden_size));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.attention_heads));
  w.f64(c.dropout);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(c.quantiles.size()));
  for (double q : c.quantiles) w.f64(q);
  for (const auto* covs : {&c.past_covariates, &c.future_covariates}) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(covs->size()));
    for (auto f : *covs) w.uint<std::uint8_t>(static_cast<std::uint8_t>(f));
  }
  w.uint<std::uint64_t>(weights.rng_seed);
  auto components = layout.components();
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(components.size()));
  for (const auto& [name, count] : components) {
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.uint<std::uint64_t>(count);
  }
  w.uint<std::uint64_t>(weights.values.size());
  for (double v : weights.values) w.f64(v);
  auto& bytes = w.data();
  std::uint32_t crc = crc_of(bytes.data(), bytes.size());
  w.uint<std::uint32_t>(crc);
  return std::move(bytes);
}

ModelWeights decode_weights(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("weight file: bad magic");
  }
  {
    Reader head(bytes, bytes.size());
    head.string(sizeof(kMagic));
    auto version = head.uint<std::uint32_t>();
    if (version != kWeightFormatVersion) {
      throw DataError("weight file: unsupported format version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kWeightFormatVersion) + ")");
    }
  }
  if (bytes.size() < sizeof(kMagic) + 8) throw DataError("weight file: checksum mismatch");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (stored != crc_of(bytes.data(), body)) throw DataError("weight file: checksum mismatch");

  Reader r(bytes, body);
  r.string(sizeof(kMagic));
  r.uint<std::uint32_t>();
  ModelWeights w;
  ModelConfig& c = w.config;
  c.input_window = static_cast<int>(r.uint<std::uint32_t>());
  c.horizon = static_cast<int>(r.uint<std::uint32_t>());
  c.hidden_size = static_cast<int>(r.uint<std::uint32_t>());
  c.attention_heads = static_cast<int>(r.uint<std::uint32_t>());
  c.dropout = r.f64();
  c.quantiles.resize(r.uint<std::uint32_t>());
  for (auto& q : c.quantiles) q = r.f64();
  for (auto* covs : {&c.past_covariates, &c.future_covariates}) {
    covs->resize(r.uint<std::uint32_t>());
    for (auto& f : *covs) {
      auto id = r.uint<std::uint8_t>();
      if (id > static_cast<std::uint8_t>(CalendarFeature::kDayOfWeek)) {
        throw DataError("weight file: unknown covariate id");
      }
      f = static_cast<CalendarFeature>(id);
    }
  }
  w.rng_seed = r.uint<std::uint64_t>();
  ParameterLayout layout(c);
  auto expected = layout.components();
  auto n_components = r.uint<std::uint32_t>();
  if (n_components != expected.size()) throw DataError("weight file: component table mismatch");
  for (const auto& [name, count] : expected) {
    auto len = r.uint<std::uint16_t>();
    if (r.string(len) != name || r.uint<std::uint64_t>() != count) {
      throw DataError("weight file: component table mismatch at " + name);
    }
  }
  auto n = r.uint<std::uint64_t>();
  if (n != layout.total()) throw DataError("weight file: parameter count mismatch");
  w.values.resize(n);
  for (auto& v : w.values) v = r.f64();
  if (r.pos() != body) throw DataError("weight file: trailing bytes before checksum");
  return w;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  auto bytes = encode_weights(weights);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

}  // namespace hems
