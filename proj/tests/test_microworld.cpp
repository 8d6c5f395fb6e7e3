#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "attseq/dataset_io.hpp"
#include "attseq/microworld.hpp"

using namespace attseq;
using namespace attseq::microworld;

namespace {

GeneratorConfig small_cfg() {
  GeneratorConfig cfg;
  cfg.max_objects = 3;
  cfg.noise_amplitude = 0.0;
  cfg.noise_channels = 0;
  return cfg;
}

bool scenes_equal(const Scene& a, const Scene& b) {
  if (a.objects.size() != b.objects.size()) return false;
  for (size_t i = 0; i < a.objects.size(); ++i) {
    const auto &x = a.objects[i], &y = b.objects[i];
    if (x.category != y.category || x.color != y.color || x.action != y.action)
      return false;
    if (x.box.x0 != y.box.x0 || x.box.y0 != y.box.y0 || x.box.x1 != y.box.x1 ||
        x.box.y1 != y.box.y1)
      return false;
  }
  return true;
}

}  // namespace

TEST(Scene, DeterministicPerSeed) {
  auto cfg = small_cfg();
  Scene a = generate_scene(7, cfg);
  Scene b = generate_scene(7, cfg);
  EXPECT_TRUE(scenes_equal(a, b));
}

TEST(Scene, DifferentSeedsDiffer) {
  auto cfg = small_cfg();
  Scene a = generate_scene(7, cfg);
  Scene b = generate_scene(8, cfg);
  EXPECT_FALSE(scenes_equal(a, b));
}

TEST(Scene, SingleObjectBoundary) {
  auto cfg = small_cfg();
  cfg.min_objects = 1;
  cfg.max_objects = 1;
  Scene s = generate_scene(7, cfg);
  EXPECT_EQ(s.objects.size(), 1u);
}

TEST(Scene, ObjectsInsideCanvas) {
  auto cfg = small_cfg();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Scene s = generate_scene(seed, cfg);
    ASSERT_GE(s.objects.size(), 1u);
    ASSERT_LE(s.objects.size(), static_cast<size_t>(cfg.max_objects));
    for (const auto& o : s.objects) {
      EXPECT_TRUE(o.box.valid());
      EXPECT_GE(o.box.x0, 0.0);
      EXPECT_GE(o.box.y0, 0.0);
      EXPECT_LE(o.box.x1, cfg.canvas_w);
      EXPECT_LE(o.box.y1, cfg.canvas_h);
    }
  }
}

TEST(Scene, InvalidConfigRejected) {
  auto cfg = small_cfg();
  cfg.categories.clear();
  EXPECT_THROW(generate_scene(1, cfg), ConfigError);
  cfg = small_cfg();
  cfg.canvas_w = 0;
  EXPECT_THROW(generate_scene(1, cfg), ConfigError);
  cfg = small_cfg();
  cfg.max_objects = 0;
  EXPECT_THROW(generate_scene(1, cfg), ConfigError);
}

TEST(Captions, SingleObjectSceneMentionsItsFacts) {
  GeneratorConfig cfg = small_cfg();
  cfg.min_objects = cfg.max_objects = 1;
  cfg.action_prob = 0.0;
  TemplateGrammar grammar;
  Scene s = generate_scene(3, cfg);
  auto caps = generate_captions(s, grammar, 11);
  ASSERT_EQ(caps.size(), 5u);
  const auto& o = s.objects.front();
  auto merge = default_merge_map(cfg);
  // inventory and location captions must mention color and category
  auto canon = [&](const std::string& t) {
    auto it = merge.find(t);
    return it == merge.end() ? t : it->second;
  };
  std::set<std::string> joined;
  for (const auto& c : caps)
    for (const auto& t : c) joined.insert(canon(t));
  EXPECT_TRUE(joined.count(o.category) > 0);
  EXPECT_TRUE(joined.count(o.color) > 0);
}

TEST(Captions, DeterministicPerSeed) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  Scene s = generate_scene(5, cfg);
  EXPECT_EQ(generate_captions(s, grammar, 9), generate_captions(s, grammar, 9));
}

TEST(Captions, CoverageEqualsFactsAcrossSeeds) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  auto merge = default_merge_map(cfg);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Scene s = generate_scene(seed, cfg);
    auto caps = generate_captions(s, grammar, seed + 1000);
    std::set<std::string> mentioned;
    for (const auto& cap : caps) {
      auto cw = content_words(cap, grammar, merge);
      // every content word must be a true scene fact
      auto facts = fact_words(s, grammar);
      for (const auto& w : cw) ASSERT_TRUE(facts.count(w)) << "untrue word: " << w;
      mentioned.insert(cw.begin(), cw.end());
    }
    EXPECT_EQ(mentioned, fact_words(s, grammar)) << "seed " << seed;
  }
}

TEST(Captions, FiveCaptionsAtLeastThreeTokens) {
  auto cfg = small_cfg();
  cfg.min_objects = 2;
  TemplateGrammar grammar;
  Scene s = generate_scene(4, cfg);
  ASSERT_GE(s.objects.size(), 2u);
  auto caps = generate_captions(s, grammar, 2);
  ASSERT_EQ(caps.size(), 5u);
  for (const auto& c : caps) EXPECT_GE(c.size(), 3u);
}

TEST(QA, AnswersEntailedByScene) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Scene s = generate_scene(seed, cfg);
    auto facts = fact_words(s, grammar);
    auto qas = generate_qa(s, seed, cfg, grammar);
    for (const auto& qa : qas) {
      ASSERT_FALSE(qa.answer.empty());
      for (const auto& w : qa.answer) {
        if (grammar.is_function_word(w)) continue;
        bool is_kind = false;
        for (const auto& [cat, kind] : cfg.kinds)
          if (kind == w) is_kind = true;
        if (is_kind) continue;  // kind words are entailed via cfg.kinds
        EXPECT_TRUE(facts.count(w)) << "answer word not a fact: " << w;
      }
    }
  }
}

TEST(QA, SingleObjectSceneHasAllTypes) {
  auto cfg = small_cfg();
  cfg.min_objects = cfg.max_objects = 1;
  cfg.synonym_rate = 0.0;
  TemplateGrammar grammar;
  Scene s = generate_scene(12, cfg);
  auto qas = generate_qa(s, 12, cfg, grammar);
  std::set<std::string> types;
  bool has_sentence = false, has_single = false;
  for (const auto& qa : qas) {
    types.insert(qa.question_type);
    if (qa.answer.size() > 1) has_sentence = true;
    if (qa.answer.size() == 1) has_single = true;
  }
  EXPECT_TRUE(types.count("number"));
  EXPECT_TRUE(types.count("color"));
  EXPECT_TRUE(types.count("location"));
  EXPECT_TRUE(types.count("object"));
  EXPECT_TRUE(has_sentence);
  EXPECT_TRUE(has_single);
}

TEST(QA, NumberQuestionForTwoObjects) {
  // construct a scene with two objects of one category directly
  Scene s;
  s.id = 1;
  s.canvas_w = s.canvas_h = 100;
  s.objects.push_back({"ball", "red", {10, 10, 30, 30}, ""});
  s.objects.push_back({"ball", "red", {60, 60, 80, 80}, ""});
  auto cfg = small_cfg();
  cfg.synonym_rate = 0.0;
  TemplateGrammar grammar;
  auto qas = generate_qa(s, 1, cfg, grammar);
  bool found = false;
  for (const auto& qa : qas) {
    if (qa.question_type == "number") {
      found = true;
      EXPECT_EQ(qa.answer, std::vector<std::string>{"two"});
      EXPECT_EQ(qa.question.front(), "how");
    }
  }
  EXPECT_TRUE(found);
}

TEST(QA, DeterministicPerSeed) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  Scene s = generate_scene(21, cfg);
  auto a = generate_qa(s, 5, cfg, grammar);
  auto b = generate_qa(s, 5, cfg, grammar);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].question, b[i].question);
    EXPECT_EQ(a[i].answer, b[i].answer);
  }
}

TEST(RegionFeatures, EmptyRegionIsPureNoiseBaseline) {
  Scene s;
  s.id = 0;
  s.canvas_w = s.canvas_h = 100;
  s.objects.push_back({"ball", "red", {50, 50, 70, 70}, ""});
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  Vec f = region_features(s, {0, 0, 10, 10}, 1, cfg, grammar);
  EXPECT_DOUBLE_EQ(f.norm(), 0.0);  // zero noise amplitude, no signal
}

TEST(RegionFeatures, WholeCanvasActivatesEveryObject) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  Scene s = generate_scene(33, cfg);
  Vec f = region_features(s, s.whole_canvas(), 1, cfg, grammar);
  auto idx_of = [&](const std::vector<std::string>& words, const std::string& w) {
    return static_cast<int>(std::find(words.begin(), words.end(), w) - words.begin());
  };
  for (const auto& o : s.objects) {
    EXPECT_EQ(f[idx_of(cfg.categories, o.category)], 1.0);
    EXPECT_EQ(f[static_cast<int>(cfg.categories.size()) + idx_of(cfg.colors, o.color)], 1.0);
  }
}

TEST(RegionFeatures, DeterministicNoise) {
  auto cfg = small_cfg();
  cfg.noise_amplitude = 0.5;
  cfg.noise_channels = 4;
  TemplateGrammar grammar;
  Scene s = generate_scene(33, cfg);
  Vec a = region_features(s, s.whole_canvas(), 77, cfg, grammar);
  Vec b = region_features(s, s.whole_canvas(), 77, cfg, grammar);
  Vec c = region_features(s, s.whole_canvas(), 78, cfg, grammar);
  EXPECT_EQ((a - b).norm(), 0.0);
  EXPECT_NE((a - c).norm(), 0.0);
}

TEST(RegionFeatures, BoxOutsideCanvasRejected) {
  auto cfg = small_cfg();
  TemplateGrammar grammar;
  Scene s = generate_scene(1, cfg);
  EXPECT_THROW(region_features(s, {-1, 0, 10, 10}, 0, cfg, grammar), DomainError);
  EXPECT_THROW(region_features(s, {0, 0, 1000, 10}, 0, cfg, grammar), DomainError);
}

TEST(Splits, ExactSizesAndPartition) {
  std::vector<int> ids(100);
  for (int i = 0; i < 100; ++i) ids[i] = i;
  auto s = make_splits(ids, 0.8, 0.1, 0.1, 5);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
  std::set<int> all;
  all.insert(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(Splits, DeterministicAndSeedSensitive) {
  std::vector<int> ids(50);
  for (int i = 0; i < 50; ++i) ids[i] = i;
  auto a = make_splits(ids, 0.6, 0.2, 0.2, 1);
  auto b = make_splits(ids, 0.6, 0.2, 0.2, 1);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
}

TEST(Splits, InvalidRatiosRejected) {
  std::vector<int> ids{1, 2, 3};
  EXPECT_THROW(make_splits(ids, 0.5, 0.5, 0.5, 1), ConfigError);
  EXPECT_THROW(make_splits(ids, 1.0, 0.0, 0.0, 1), ConfigError);
}

TEST(Corpus, JsonlRoundTrip) {
  auto cfg = small_cfg();
  cfg.noise_amplitude = 0.3;
  cfg.noise_channels = 2;
  TemplateGrammar grammar;
  auto corpus = generate_corpus(cfg, grammar, 12, 99);
  auto dir = std::filesystem::temp_directory_path() / "attseq_io_test";
  std::filesystem::create_directories(dir);
  auto scenes_path = (dir / "scenes.jsonl").string();
  auto captions_path = (dir / "captions.jsonl").string();
  auto qa_path = (dir / "qa.jsonl").string();
  dataset_io::write_scenes(scenes_path, corpus.scenes);
  dataset_io::write_captions(captions_path, corpus.captions);
  dataset_io::write_qa(qa_path, corpus.qa);

  auto scenes = dataset_io::read_scenes(scenes_path);
  auto captions = dataset_io::read_captions(captions_path);
  auto qa = dataset_io::read_qa(qa_path);
  ASSERT_EQ(scenes.size(), corpus.scenes.size());
  ASSERT_EQ(captions.size(), corpus.captions.size());
  ASSERT_EQ(qa.size(), corpus.qa.size());
  for (size_t i = 0; i < scenes.size(); ++i)
    EXPECT_TRUE(scenes_equal(scenes[i], corpus.scenes[i]));
  for (size_t i = 0; i < captions.size(); ++i) {
    EXPECT_EQ(captions[i].captions, corpus.captions[i].captions);
    EXPECT_EQ((captions[i].feature - corpus.captions[i].feature).norm(), 0.0);
  }
  for (size_t i = 0; i < qa.size(); ++i) {
    EXPECT_EQ(qa[i].question, corpus.qa[i].question);
    EXPECT_EQ(qa[i].answer, corpus.qa[i].answer);
    EXPECT_EQ(qa[i].question_type, corpus.qa[i].question_type);
  }
  std::filesystem::remove_all(dir);
}

TEST(Corpus, GenerationIsDeterministic) {
  auto cfg = small_cfg();
  cfg.noise_amplitude = 0.4;
  TemplateGrammar grammar;
  auto a = generate_corpus(cfg, grammar, 10, 3);
  auto b = generate_corpus(cfg, grammar, 10, 3);
  ASSERT_EQ(a.qa.size(), b.qa.size());
  for (size_t i = 0; i < a.scenes.size(); ++i) {
    EXPECT_TRUE(scenes_equal(a.scenes[i], b.scenes[i]));
    EXPECT_EQ(a.captions[i].captions, b.captions[i].captions);
    EXPECT_EQ((a.captions[i].feature - b.captions[i].feature).norm(), 0.0);
  }
}
