#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "attseq/common.hpp"
#include "attseq/rng.hpp"

namespace attseq::microworld {

struct RegionBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool valid() const { return x0 < x1 && y0 < y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return valid() ? width() * height() : 0.0; }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }

  bool intersects(const RegionBox& o) const {
    return std::min(x1, o.x1) > std::max(x0, o.x0) &&
           std::min(y1, o.y1) > std::max(y0, o.y0);
  }
};

struct ObjectInstance {
  std::string category;
  std::string color;
  RegionBox box;
  std::string action;  // empty when the object has none
};

struct Scene {
  int id = 0;
  std::vector<ObjectInstance> objects;
  double canvas_w = 0, canvas_h = 0;

  RegionBox whole_canvas() const { return RegionBox{0, 0, canvas_w, canvas_h}; }
};

struct CaptionedExample {
  int scene_id = 0;
  std::vector<std::vector<std::string>> captions;  // exactly 5
  Vec feature;  // whole-canvas region feature, the raw-input baseline
};

struct QAExample {
  int scene_id = 0;
  std::vector<std::string> question;
  std::vector<std::string> answer;        // single token for T=1 examples
  std::string question_type;              // object / number / color / location
  std::string subtype;                    // finer generator tag (e.g. "kind")
  std::string asked_category;             // canonical category the question refers to
  bool uses_synonym = false;              // question surface uses a non-canonical form
};

// ---------------------------------------------------------------------------
// Generator configuration
// ---------------------------------------------------------------------------

struct GeneratorConfig {
  std::vector<std::string> categories = {"ball", "kite", "cat",   "dog",
                                         "bird", "fish", "couch", "chair",
                                         "lamp", "bed",  "car",   "bus"};
  std::vector<std::string> colors = {"red", "blue", "green", "yellow", "black", "white"};
  std::vector<std::string> actions = {"running", "sleeping", "jumping",
                                      "sitting", "eating",   "flying"};
  // Categories that may carry an action.
  std::vector<std::string> animate = {"cat", "dog", "bird", "fish"};
  // Canonical word -> superordinate "kind" word (knowledge-sourced answers).
  std::map<std::string, std::string> kinds = {
      {"cat", "animal"},    {"dog", "animal"},   {"bird", "animal"},
      {"fish", "animal"},   {"couch", "furniture"}, {"chair", "furniture"},
      {"lamp", "furniture"}, {"bed", "furniture"}, {"ball", "toy"},
      {"kite", "toy"},      {"car", "vehicle"},  {"bus", "vehicle"}};
  // Canonical word -> synonym surface form used in question phrasing.
  std::map<std::string, std::string> synonyms = {
      {"couch", "sofa"}, {"cat", "kitty"},    {"dog", "puppy"},
      {"car", "auto"},   {"red", "crimson"},  {"blue", "azure"}};
  double canvas_w = 100.0;
  double canvas_h = 100.0;
  int min_objects = 1;
  int max_objects = 3;
  double action_prob = 0.6;       // chance an animate object gets an action
  double noise_amplitude = 0.0;   // stddev of additive feature noise
  int noise_channels = 8;         // extra pure-noise feature dimensions
  double synonym_rate = 0.25;     // chance an eligible question uses a synonym

  void validate() const {
    if (categories.empty() || colors.empty())
      throw ConfigError("generator: lexicon must be nonempty");
    if (canvas_w <= 0 || canvas_h <= 0)
      throw ConfigError("generator: canvas must have positive extent");
    if (min_objects < 1 || max_objects < min_objects)
      throw ConfigError("generator: invalid object-count range");
    if (noise_amplitude < 0) throw ConfigError("generator: negative noise amplitude");
    if (noise_channels < 0) throw ConfigError("generator: negative noise channels");
    for (const auto& a : animate)
      if (std::find(categories.begin(), categories.end(), a) == categories.end())
        throw ConfigError("generator: animate word not in categories: " + a);
  }

  bool is_animate(const std::string& cat) const {
    return std::find(animate.begin(), animate.end(), cat) != animate.end();
  }
};

inline const std::vector<std::string>& location_words() {
  static const std::vector<std::string> w = {"left", "right", "top", "bottom"};
  return w;
}

// Location word of an object: dominant axis of its center offset from the
// canvas center; ties go to the horizontal axis.
inline std::string location_word(const Scene& scene, const ObjectInstance& obj) {
  double dx = obj.box.cx() - 0.5 * scene.canvas_w;
  double dy = obj.box.cy() - 0.5 * scene.canvas_h;
  if (std::abs(dx) >= std::abs(dy)) return dx < 0 ? "left" : "right";
  return dy < 0 ? "top" : "bottom";
}

// ---------------------------------------------------------------------------
// Template grammar
// ---------------------------------------------------------------------------

struct TemplateGrammar {
  std::vector<std::string> count_words = {"one", "two", "three", "four", "five"};
  // Closed-class scaffolding; never counted as content.
  std::vector<std::string> function_words = {
      "a",    "the",  "and", "there", "is",  "are", "at",   "in",
      "here", "you",  "can", "see",   "look", "scene"};

  const std::string& count_word(size_t n) const {
    if (n == 0 || n > count_words.size())
      throw DomainError("grammar: no count word for " + std::to_string(n));
    return count_words[n - 1];
  }

  bool is_function_word(const std::string& w) const {
    return std::find(function_words.begin(), function_words.end(), w) !=
           function_words.end();
  }
};

// Naive pluralizer covering the shipped lexicon.
inline std::string pluralize(const std::string& w) {
  auto ends_with = [&](const char* s) {
    std::string_view sv(s);
    return w.size() >= sv.size() && w.compare(w.size() - sv.size(), sv.size(), sv) == 0;
  };
  if (ends_with("s") || ends_with("x") || ends_with("ch") || ends_with("sh"))
    return w + "es";
  return w + "s";
}

// Surface-form -> canonical merge table covering the grammar's plural variants.
inline std::map<std::string, std::string> default_merge_map(const GeneratorConfig& cfg) {
  std::map<std::string, std::string> m;
  for (const auto& c : cfg.categories) m[pluralize(c)] = c;
  return m;
}

// ---------------------------------------------------------------------------
// Scene facts
// ---------------------------------------------------------------------------

// The canonical content words a scene's captions must (jointly) mention:
// categories, colors, actions, per-object locations, and per-category counts.
inline std::set<std::string> fact_words(const Scene& scene, const TemplateGrammar& grammar) {
  std::set<std::string> facts;
  std::map<std::string, size_t> per_category;
  for (const auto& o : scene.objects) {
    facts.insert(o.category);
    facts.insert(o.color);
    if (!o.action.empty()) facts.insert(o.action);
    facts.insert(location_word(scene, o));
    per_category[o.category]++;
  }
  for (const auto& [cat, n] : per_category) facts.insert(grammar.count_word(n));
  return facts;
}

// Canonical content words of a token sequence: drop function words, then merge.
inline std::set<std::string> content_words(const std::vector<std::string>& tokens,
                                           const TemplateGrammar& grammar,
                                           const std::map<std::string, std::string>& merge) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (grammar.is_function_word(t)) continue;
    auto it = merge.find(t);
    out.insert(it == merge.end() ? t : it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene generation
// ---------------------------------------------------------------------------

inline Scene generate_scene(std::uint64_t seed, const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng = Rng::fork(seed, "scene");
  Scene scene;
  scene.id = static_cast<int>(seed);
  scene.canvas_w = cfg.canvas_w;
  scene.canvas_h = cfg.canvas_h;
  int n = static_cast<int>(rng.uniform_int(cfg.min_objects, cfg.max_objects));
  for (int i = 0; i < n; ++i) {
    ObjectInstance obj;
    obj.category = rng.choice(cfg.categories);
    obj.color = rng.choice(cfg.colors);
    if (cfg.is_animate(obj.category) && !cfg.actions.empty() &&
        rng.bernoulli(cfg.action_prob)) {
      obj.action = rng.choice(cfg.actions);
    }
    double w = rng.uniform(0.12, 0.35) * cfg.canvas_w;
    double h = rng.uniform(0.12, 0.35) * cfg.canvas_h;
    double x0 = rng.uniform(0.0, cfg.canvas_w - w);
    double y0 = rng.uniform(0.0, cfg.canvas_h - h);
    obj.box = RegionBox{x0, y0, x0 + w, y0 + h};
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Caption generation
// ---------------------------------------------------------------------------

namespace detail {

inline void append(std::vector<std::string>& out, std::initializer_list<std::string> ws) {
  for (const auto& w : ws) out.push_back(w);
}

// Joins clause lists with "and".
inline std::vector<std::string> join_clauses(const std::vector<std::vector<std::string>>& parts) {
  std::vector<std::string> out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back("and");
    out.insert(out.end(), parts[i].begin(), parts[i].end());
  }
  return out;
}

}  // namespace detail

// Five captions per scene. Captions 1-4 are role captions guaranteeing that
// every scene fact is mentioned at least once across the set; caption 5 adds
// surface variety. Every content word in any caption is a true scene fact.
inline std::vector<std::vector<std::string>> generate_captions(const Scene& scene,
                                                               const TemplateGrammar& grammar,
                                                               std::uint64_t seed) {
  if (scene.objects.empty()) throw DomainError("captions: scene has no objects");
  Rng rng = Rng::fork(seed, "captions", static_cast<std::uint64_t>(scene.id));
  std::vector<std::vector<std::string>> caps;

  // 1: inventory — "a red ball and a blue cat"
  {
    std::vector<std::vector<std::string>> parts;
    for (const auto& o : scene.objects)
      parts.push_back({"a", o.color, o.category});
    caps.push_back(detail::join_clauses(parts));
  }

  // 2: counts — "there are two balls and one box"
  {
    std::map<std::string, size_t> per_category;
    std::vector<std::string> order;  // category order of first appearance
    for (const auto& o : scene.objects) {
      if (per_category[o.category]++ == 0) order.push_back(o.category);
    }
    std::vector<std::vector<std::string>> parts;
    for (const auto& cat : order) {
      size_t n = per_category[cat];
      parts.push_back({grammar.count_word(n), n == 1 ? cat : pluralize(cat)});
    }
    std::vector<std::string> cap = {"there",
                                    scene.objects.size() == 1 ? "is" : "are"};
    auto joined = detail::join_clauses(parts);
    cap.insert(cap.end(), joined.begin(), joined.end());
    caps.push_back(std::move(cap));
  }

  // 3: locations — "the red ball is at the left and the blue cat is at the top"
  {
    std::vector<std::vector<std::string>> parts;
    for (const auto& o : scene.objects)
      parts.push_back({"the", o.color, o.category, "is", "at", "the",
                       location_word(scene, o)});
    caps.push_back(detail::join_clauses(parts));
  }

  // 4: actions if any, else a single-object mention
  {
    std::vector<std::vector<std::string>> parts;
    for (const auto& o : scene.objects)
      if (!o.action.empty())
        parts.push_back({"the", o.color, o.category, "is", o.action});
    if (!parts.empty()) {
      caps.push_back(detail::join_clauses(parts));
    } else {
      const auto& o = rng.choice(scene.objects);
      caps.push_back({"you", "can", "see", "a", o.color, o.category});
    }
  }

  // 5: variety
  {
    const auto& o = rng.choice(scene.objects);
    switch (rng.uniform_int(0, 3)) {
      case 0: caps.push_back({"you", "can", "see", "a", o.color, o.category}); break;
      case 1: caps.push_back({"there", "is", "a", o.color, o.category, "here"}); break;
      case 2: caps.push_back({"a", o.color, o.category, "is", "in", "the", "scene"}); break;
      default: caps.push_back({"look", "at", "the", o.color, o.category}); break;
    }
  }
  return caps;
}

// ---------------------------------------------------------------------------
// QA generation
// ---------------------------------------------------------------------------
//
// The attribute vector is an unordered bag, so a question is only emitted when
// its answer is a function of (bag, question): single-object scenes support all
// bindings; multi-object scenes only get questions whose answer is shared by
// every plausible referent.

namespace detail {

inline std::string question_surface(const GeneratorConfig& cfg, Rng& rng,
                                    const std::string& canonical, bool& used_synonym) {
  auto it = cfg.synonyms.find(canonical);
  if (it != cfg.synonyms.end() && rng.bernoulli(cfg.synonym_rate)) {
    used_synonym = true;
    return it->second;
  }
  return canonical;
}

}  // namespace detail

inline std::vector<QAExample> generate_qa(const Scene& scene, std::uint64_t seed,
                                          const GeneratorConfig& cfg,
                                          const TemplateGrammar& grammar) {
  if (scene.objects.empty()) throw DomainError("qa: scene has no objects");
  Rng rng = Rng::fork(seed, "qa", static_cast<std::uint64_t>(scene.id));
  std::vector<QAExample> out;
  const bool single = scene.objects.size() == 1;

  std::map<std::string, size_t> per_category;
  std::vector<std::string> category_order;
  for (const auto& o : scene.objects)
    if (per_category[o.category]++ == 0) category_order.push_back(o.category);

  auto push = [&](QAExample ex) {
    ex.scene_id = scene.id;
    out.push_back(std::move(ex));
  };

  // number: only when a single category is present (the count word is then
  // unambiguous in the bag).
  if (per_category.size() == 1) {
    const auto& cat = category_order.front();
    QAExample ex;
    ex.question_type = "number";
    ex.asked_category = cat;
    std::string surf = detail::question_surface(cfg, rng, cat, ex.uses_synonym);
    ex.question = {"how", "many", pluralize(surf), "are", "there"};
    ex.answer = {grammar.count_word(scene.objects.size())};
    push(std::move(ex));
  }

  // color: per category whose instances share one color, provided the scene
  // has a single object or a single shared color overall.
  {
    std::set<std::string> scene_colors;
    for (const auto& o : scene.objects) scene_colors.insert(o.color);
    if (single || scene_colors.size() == 1) {
      for (const auto& cat : category_order) {
        QAExample ex;
        ex.question_type = "color";
        ex.asked_category = cat;
        std::string surf = detail::question_surface(cfg, rng, cat, ex.uses_synonym);
        ex.question = {"what", "color", "is", "the", surf};
        ex.answer = {*scene_colors.begin()};
        if (single) ex.answer = {scene.objects.front().color};
        push(std::move(ex));
      }
    }
  }

  // location: when all objects share a location word (always true for one).
  {
    std::set<std::string> locs;
    for (const auto& o : scene.objects) locs.insert(location_word(scene, o));
    if (locs.size() == 1) {
      for (const auto& cat : category_order) {
        QAExample ex;
        ex.question_type = "location";
        ex.asked_category = cat;
        std::string surf = detail::question_surface(cfg, rng, cat, ex.uses_synonym);
        ex.question = {"where", "is", "the", surf};
        ex.answer = {*locs.begin()};
        push(std::move(ex));
      }
    }
  }

  // object, single word: "what is the red thing" (single-object scenes).
  if (single) {
    const auto& o = scene.objects.front();
    QAExample ex;
    ex.question_type = "object";
    ex.asked_category = o.category;
    std::string surf = detail::question_surface(cfg, rng, o.color, ex.uses_synonym);
    ex.question = {"what", "is", "the", surf, "thing"};
    ex.answer = {o.category};
    push(std::move(ex));
  }

  // object, sentence: "what is at the left" -> "a red ball" (unique referent).
  if (single) {
    const auto& o = scene.objects.front();
    QAExample ex;
    ex.question_type = "object";
    ex.subtype = "sentence";
    ex.asked_category = o.category;
    ex.question = {"what", "is", "at", "the", location_word(scene, o)};
    ex.answer = {"a", o.color, o.category};
    push(std::move(ex));
  }

  // kind: "what kind of thing is the cat" -> "animal"; emitted only when all
  // objects share one kind so the answer is recoverable from input channels.
  {
    std::set<std::string> scene_kinds;
    bool all_known = true;
    for (const auto& o : scene.objects) {
      auto it = cfg.kinds.find(o.category);
      if (it == cfg.kinds.end()) { all_known = false; break; }
      scene_kinds.insert(it->second);
    }
    if (all_known && scene_kinds.size() == 1) {
      for (const auto& cat : category_order) {
        QAExample ex;
        ex.question_type = "object";
        ex.subtype = "kind";
        ex.asked_category = cat;
        std::string surf = detail::question_surface(cfg, rng, cat, ex.uses_synonym);
        ex.question = {"what", "kind", "of", "thing", "is", "the", surf};
        ex.answer = {*scene_kinds.begin()};
        push(std::move(ex));
      }
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// Region features
// ---------------------------------------------------------------------------

// Channel layout: categories | colors | actions | locations | counts | noise.
inline int feature_dim(const GeneratorConfig& cfg, const TemplateGrammar& grammar) {
  return static_cast<int>(cfg.categories.size() + cfg.colors.size() +
                          cfg.actions.size() + location_words().size() +
                          grammar.count_words.size() + cfg.noise_channels);
}

inline Vec region_features(const Scene& scene, const RegionBox& box,
                           std::uint64_t noise_seed, const GeneratorConfig& cfg,
                           const TemplateGrammar& grammar) {
  if (!box.valid()) throw DomainError("region_features: invalid box");
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > scene.canvas_w || box.y1 > scene.canvas_h)
    throw DomainError("region_features: box outside canvas");

  const int dim = feature_dim(cfg, grammar);
  Vec f = Vec::Zero(dim);
  auto channel = [&](const std::vector<std::string>& words, const std::string& w,
                     int base) -> int {
    auto it = std::find(words.begin(), words.end(), w);
    return it == words.end() ? -1 : base + static_cast<int>(it - words.begin());
  };
  const int cat_base = 0;
  const int col_base = cat_base + static_cast<int>(cfg.categories.size());
  const int act_base = col_base + static_cast<int>(cfg.colors.size());
  const int loc_base = act_base + static_cast<int>(cfg.actions.size());
  const int cnt_base = loc_base + static_cast<int>(location_words().size());

  std::map<std::string, size_t> region_counts;
  for (const auto& o : scene.objects) {
    if (!box.intersects(o.box)) continue;
    if (int c = channel(cfg.categories, o.category, cat_base); c >= 0) f[c] = 1.0;
    if (int c = channel(cfg.colors, o.color, col_base); c >= 0) f[c] = 1.0;
    if (!o.action.empty())
      if (int c = channel(cfg.actions, o.action, act_base); c >= 0) f[c] = 1.0;
    if (int c = channel(location_words(), location_word(scene, o), loc_base); c >= 0)
      f[c] = 1.0;
    region_counts[o.category]++;
  }
  for (const auto& [cat, n] : region_counts) {
    if (n <= grammar.count_words.size()) {
      f[cnt_base + static_cast<int>(n) - 1] = 1.0;
    }
  }

  if (cfg.noise_amplitude > 0 || cfg.noise_channels > 0) {
    Rng rng = Rng::fork(noise_seed, "feature-noise");
    for (int i = 0; i < dim; ++i) f[i] += cfg.noise_amplitude * rng.normal();
  }
  return f;
}

// Stable per-(scene, box-index) noise stream.
inline std::uint64_t feature_noise_seed(std::uint64_t corpus_seed, int scene_id,
                                        int box_index) {
  return corpus_seed ^ (static_cast<std::uint64_t>(scene_id) << 20) ^
         (static_cast<std::uint64_t>(box_index + 1) * 0x9e3779b97f4a7c15ull);
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

// ---------------------------------------------------------------------------
// Corpus assembly
// ---------------------------------------------------------------------------

struct Corpus {
  std::vector<Scene> scenes;
  std::vector<CaptionedExample> captions;  // one per scene
  std::vector<QAExample> qa;
};

// Whole-canvas features use box index -1; proposal boxes use their list index.
inline Corpus generate_corpus(const GeneratorConfig& cfg, const TemplateGrammar& grammar,
                              int n_scenes, std::uint64_t seed) {
  cfg.validate();
  if (n_scenes <= 0) throw ConfigError("corpus: n_scenes must be positive");
  Corpus corpus;
  for (int i = 0; i < n_scenes; ++i) {
    Scene scene = generate_scene(seed ^ (0xc0ffee00ull + static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ull), cfg);
    scene.id = i;
    CaptionedExample ce;
    ce.scene_id = i;
    ce.captions = generate_captions(scene, grammar, seed);
    ce.feature = region_features(scene, scene.whole_canvas(),
                                 feature_noise_seed(seed, i, -1), cfg, grammar);
    auto qa = generate_qa(scene, seed, cfg, grammar);
    corpus.scenes.push_back(std::move(scene));
    corpus.captions.push_back(std::move(ce));
    corpus.qa.insert(corpus.qa.end(), qa.begin(), qa.end());
  }
  return corpus;
}

struct Splits {
  std::vector<int> train, val, test;
};

inline Splits make_splits(const std::vector<int>& ids, double r_train, double r_val,
                          double r_test, std::uint64_t seed) {
  if (r_train <= 0 || r_val <= 0 || r_test <= 0)
    throw ConfigError("splits: ratios must be positive");
  if (std::abs(r_train + r_val + r_test - 1.0) > 1e-9)
    throw ConfigError("splits: ratios must sum to 1");
  std::vector<int> order = ids;
  Rng rng = Rng::fork(seed, "splits");
  rng.shuffle(order);
  const auto n = static_cast<long long>(order.size());
  long long c1 = std::llround(static_cast<double>(n) * r_train);
  long long c2 = std::llround(static_cast<double>(n) * (r_train + r_val)) - c1;
  Splits s;
  s.train.assign(order.begin(), order.begin() + c1);
  s.val.assign(order.begin() + c1, order.begin() + c1 + c2);
  s.test.assign(order.begin() + c1 + c2, order.end());
  return s;
}

}  // namespace attseq::microworld
