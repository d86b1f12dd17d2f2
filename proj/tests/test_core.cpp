// Copyright 2026 The binomark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "binomark/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace binomark {
namespace {

TEST(DistributionTest, AcceptsUniformAndOneHot) {
  const std::vector<double> uniform{0.5, 0.5};
  const Distribution p = validate_distribution(uniform);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  const std::vector<double> one_hot{1.0, 0.0};
  const Distribution q = validate_distribution(one_hot);
  EXPECT_EQ(q.support(), std::vector<Token>{0});
  EXPECT_DOUBLE_EQ(q.entropy(), 0.0);
}

TEST(DistributionTest, RejectsBadSums) {
  const std::vector<double> heavy{0.6, 0.6};
  try {
    validate_distribution(heavy);
    FAIL() << "expected SumNotOne";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSumNotOne);
  }
}

TEST(DistributionTest, RejectsNegativeEntries) {
  const std::vector<double> v{1.5, -0.5};
  try {
    validate_distribution(v);
    FAIL() << "expected NegativeEntry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeEntry);
  }
}

TEST(DistributionTest, RenormalizesWithinIngestTolerance) {
  const std::vector<double> v{0.5 + 4e-7, 0.5};
  const Distribution p = validate_distribution(v);
  EXPECT_NEAR(p.probs().sum(), 1.0, 1e-12);
  const std::vector<double> off{0.5 + 4e-6, 0.5};
  EXPECT_THROW(validate_distribution(off), Error);
}

TEST(DistributionTest, EmptyAndNonFiniteAreInvalid) {
  EXPECT_THROW(validate_distribution(std::vector<double>{}), Error);
  EXPECT_THROW(validate_distribution(std::vector<double>{NAN, 1.0}), Error);
}

TEST(DistributionTest, EntropyOfUniform) {
  EXPECT_NEAR(Distribution::uniform(8).entropy(), std::log(8.0), 1e-12);
}

TEST(MessageTest, FromHex) {
  EXPECT_EQ(message_from_hex("a", 4).to_string(), "1010");
  EXPECT_EQ(message_from_hex("ff", 8).to_string(), "11111111");
  EXPECT_EQ(message_from_hex("A5", 6).to_string(), "101001");
}

TEST(MessageTest, TooShortAndBadHex) {
  try {
    message_from_hex("0", 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
  try {
    message_from_hex("zz", 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadHex);
  }
}

TEST(MessageTest, HexRoundTrip) {
  std::mt19937_64 rng(3);
  for (std::size_t m : {1, 3, 4, 7, 16, 33, 64}) {
    const Message msg = Message::random(m, rng);
    EXPECT_EQ(message_from_hex(message_to_hex(msg), m), msg) << m;
  }
  EXPECT_EQ(message_to_hex(Message({1, 0, 1})), "a");
}

TEST(MessageTest, RejectsEmptyAndNonBinary) {
  EXPECT_THROW(Message(std::vector<std::uint8_t>{}), Error);
  EXPECT_THROW(Message(std::vector<std::uint8_t>{0, 2}), Error);
}

TEST(MessageTest, Complement) {
  EXPECT_EQ(Message({0, 1, 1}).complement().to_string(), "100");
}

TEST(VocabularyTest, SentinelIsOutsideTheVocabulary) {
  const Vocabulary v(16);
  EXPECT_EQ(v.sentinel(), 16u);
  EXPECT_FALSE(v.contains(v.sentinel()));
  EXPECT_THROW(Vocabulary(1), Error);
}

TEST(TokenSequenceTest, ContextIncludesPrefixAndPads) {
  const TokenSequence seq{{7, 8}, {1, 2, 3}};
  EXPECT_EQ(seq.context(0, 3, 99), (std::vector<Token>{99, 7, 8}));
  EXPECT_EQ(seq.context(2, 3, 99), (std::vector<Token>{8, 1, 2}));
  const TokenSequence bare{{}, {4, 5}};
  EXPECT_EQ(bare.context(0, 2, 99), (std::vector<Token>{99, 99}));
  EXPECT_EQ(bare.context(1, 2, 99), (std::vector<Token>{99, 4}));
}

TEST(WatermarkKeyTest, FromHexNeedsExactly64Chars) {
  const std::string hex(64, 'a');
  EXPECT_EQ(WatermarkKey::from_hex(hex).bytes[0], 0xaa);
  EXPECT_THROW(WatermarkKey::from_hex(std::string(62, 'a')), Error);
  EXPECT_THROW(WatermarkKey::from_hex(std::string(63, 'a') + "g"), Error);
}

TEST(MixSeedTest, DeterministicAndSpread) {
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
}

}  // namespace
}  // namespace binomark
