#include <gtest/gtest.h>

#include <algorithm>

#include "attseq/rng.hpp"
#include "attseq/vocab.hpp"

using namespace attseq;
using namespace attseq::vocab;

namespace {
std::vector<TokenSeq> corpus_of(std::initializer_list<const char*> sents) {
  std::vector<TokenSeq> out;
  for (const char* s : sents) out.push_back(split_ws(s));
  return out;
}
}  // namespace

TEST(MineAttributes, HandCountedTopTwo) {
  auto corpus = corpus_of({"a red ball", "a red box"});
  auto v = mine_attributes(corpus, 2, {});
  // freqs: a=2, red=2, ball=1, box=1; ties broken lexicographically
  EXPECT_EQ(v.words(), (std::vector<std::string>{"a", "red"}));
}

TEST(MineAttributes, MergeMapCombinesFrequencies) {
  auto corpus = corpus_of({"ball", "balls", "box"});
  MergeMap merge{{"balls", "ball"}};
  auto v = mine_attributes(corpus, 1, merge);
  EXPECT_EQ(v.words(), (std::vector<std::string>{"ball"}));
  EXPECT_EQ(v.index_of("balls"), 0);  // merged surface form hits the canonical slot
}

TEST(MineAttributes, AllDistinctWordsBoundary) {
  auto corpus = corpus_of({"a red ball", "a red box"});
  auto v = mine_attributes(corpus, 4, {});
  std::vector<std::string> words = v.words();
  std::sort(words.begin(), words.end());
  EXPECT_EQ(words, (std::vector<std::string>{"a", "ball", "box", "red"}));
}

TEST(MineAttributes, TooLargeCRejected) {
  auto corpus = corpus_of({"a red ball"});
  EXPECT_THROW(mine_attributes(corpus, 4, {}), DomainError);
  EXPECT_THROW(mine_attributes({}, 1, {}), DomainError);
}

TEST(MineAttributes, OrderInvariantToCorpusOrder) {
  auto c1 = corpus_of({"a red ball", "the blue box", "a green cat"});
  auto c2 = c1;
  std::reverse(c2.begin(), c2.end());
  EXPECT_EQ(mine_attributes(c1, 5, {}).words(), mine_attributes(c2, 5, {}).words());
}

TEST(WordDict, MinCountOneKeepsEverything) {
  auto corpus = corpus_of({"a red ball", "a red box"});
  auto d = build_word_dict(corpus, 1);
  for (const char* w : {"a", "red", "ball", "box"}) EXPECT_TRUE(d.contains(w));
  EXPECT_EQ(d.size(), 4 + 3);  // four words + START/END/UNK
}

TEST(WordDict, ThresholdBoundaryMapsToUnk) {
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back({"rare"});
  for (int i = 0; i < 5; ++i) corpus.push_back({"common"});
  auto d = build_word_dict(corpus, 5);
  EXPECT_FALSE(d.contains("rare"));
  EXPECT_TRUE(d.contains("common"));
  EXPECT_EQ(d.encode("rare"), WordDict::kUnk);
}

TEST(WordDict, PinnedSizeOnFixtureCorpus) {
  auto corpus = corpus_of({"a red ball", "a red box", "a blue ball", "the cat", "the dog",
                           "a green ball", "a red cat", "the blue box", "a dog here",
                           "look here"});
  // counts: a=6, red=3, ball=3, box=2, blue=2, the=3, cat=2, dog=2, here=2,
  //         green=1, look=1 -> min_count=2 keeps 9 words
  auto d = build_word_dict(corpus, 2);
  EXPECT_EQ(d.size(), 9 + 3);
}

TEST(WordDict, ReservedIdsDistinct) {
  auto d = build_word_dict(corpus_of({"a b"}), 1);
  EXPECT_NE(WordDict::kStart, WordDict::kEnd);
  EXPECT_NE(WordDict::kEnd, WordDict::kUnk);
  EXPECT_TRUE(WordDict::reserved(WordDict::kStart));
  EXPECT_FALSE(WordDict::reserved(d.encode("a")));
}

TEST(WordDict, EncodeDecodeRoundTripProperty) {
  std::vector<std::string> pool = {"a", "b", "c", "dd", "ee", "fff", "gg", "h"};
  std::vector<TokenSeq> corpus;
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    TokenSeq s;
    for (int j = 0; j < 6; ++j) s.push_back(rng.choice(pool));
    corpus.push_back(s);
  }
  auto d = build_word_dict(corpus, 1);
  for (int trial = 0; trial < 100; ++trial) {
    TokenSeq s;
    for (int j = 0; j < 8; ++j) s.push_back(rng.choice(pool));
    EXPECT_EQ(d.decode(d.encode(s)), s);
  }
}

TEST(GroundTruth, ZeroAndOnesVectors) {
  auto corpus = corpus_of({"a red ball", "a red box"});
  auto v = mine_attributes(corpus, 2, {});  // {a, red}
  Vec none = ground_truth_attributes(corpus_of({"blue cat"}), v);
  EXPECT_EQ(none.sum(), 0.0);
  Vec all = ground_truth_attributes(corpus_of({"a red thing"}), v);
  EXPECT_EQ(all.sum(), 2.0);
}

TEST(GroundTruth, PinnedIndicatorOnFixture) {
  auto corpus = corpus_of({"a red ball and a blue cat", "there are two balls",
                           "the red ball is at the left", "you can see a blue cat",
                           "look at the red ball"});
  MergeMap merge{{"balls", "ball"}};
  auto v = mine_attributes(corpus, 6, merge);
  // freq: a=4, the=4, red=3, ball=4 (incl merged balls), blue=2, cat=2, at=2, ...
  Vec gt = ground_truth_attributes(corpus, v);
  for (int i = 0; i < gt.size(); ++i) EXPECT_EQ(gt[i], 1.0);
  Vec gt2 = ground_truth_attributes(corpus_of({"two balls"}), v);
  int ball_idx = v.index_of("ball");
  ASSERT_GE(ball_idx, 0);
  EXPECT_EQ(gt2[ball_idx], 1.0);
  EXPECT_EQ(gt2.sum(), 1.0);  // only "ball" fires (merged from "balls")
}

TEST(GroundTruth, MonotoneUnderAddedCaptions) {
  auto corpus = corpus_of({"a red ball", "a blue box", "the green cat", "a dog"});
  auto v = mine_attributes(corpus, 6, {});
  Rng rng(17);
  std::vector<std::string> pool = {"a", "red", "ball", "blue", "box", "green", "cat", "dog"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenSeq> caps;
    int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) {
      TokenSeq s;
      for (int j = 0; j < 3; ++j) s.push_back(rng.choice(pool));
      caps.push_back(s);
    }
    Vec before = ground_truth_attributes(caps, v);
    TokenSeq extra;
    for (int j = 0; j < 3; ++j) extra.push_back(rng.choice(pool));
    caps.push_back(extra);
    Vec after = ground_truth_attributes(caps, v);
    for (int i = 0; i < before.size(); ++i) EXPECT_GE(after[i], before[i]);
  }
}
