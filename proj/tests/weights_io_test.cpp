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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hems/errors.hpp"

namespace hems {
namespace {

ModelWeights sample_weights() {
  ModelConfig c;
  c.input_window = 12;
  c.horizon = 4;
  c.hidden_size = 6;
  c.attention_heads = 3;
  c.quantiles = {0.05, 0.5, 0.95};
  c.past_covariates = {CalendarFeature::kHourOfDay};
  c.future_covariates = {CalendarFeature::kDayOfWeek, CalendarFeature::kIsWeekend};
  return init_model(c, 99);
}

TEST(WeightsIo, RoundTripBytes) {
  auto w = sample_weights();
  auto bytes = encode_weights(w);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), std::string("HEMSWGT\0", 8));
  auto back = decode_weights(bytes);
  EXPECT_EQ(back, w);
  EXPECT_EQ(encode_weights(back), bytes);
}

TEST(WeightsIo, RoundTripFile) {
  auto path = std::filesystem::temp_directory_path() / "hems_weights_test.hwt";
  auto w = init_model(ModelConfig{}, 1);
  save_weights(w, path);
  EXPECT_EQ(load_weights(path), w);
  std::filesystem::remove(path);
}

TEST(WeightsIo, CorruptionDetected) {
  auto bytes = encode_weights(sample_weights());
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_weights(flipped), DataError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  try {
    decode_weights(truncated);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_weights(bad_magic), DataError);
  EXPECT_THROW(decode_weights({}), DataError);
}

TEST(WeightsIo, NewerVersionRejected) {
  auto bytes = encode_weights(sample_weights());
  bytes[8] = static_cast<std::uint8_t>(kWeightFormatVersion + 1);
  try {
    decode_weights(bytes);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
}

TEST(WeightsIo, MismatchedVectorRejected) {
  auto w = sample_weights();
  w.values.push_back(0.0);
  EXPECT_THROW(encode_weights(w), DataError);
}

TEST(WeightsIo, MissingFile) {
  EXPECT_THROW(load_weights("/nonexistent/dir/w.hwt"), IoError);
}

}  // namespace
}  // namespace hems
