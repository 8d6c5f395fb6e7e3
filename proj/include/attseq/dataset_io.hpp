#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attseq/common.hpp"
#include "attseq/microworld.hpp"

// Line-delimited dataset records. Every line is a standalone JSON object with
// a mandatory schema_version field.

namespace attseq::dataset_io {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

inline void check_schema(const json& j, const std::string& what) {
  if (!j.contains("schema_version"))
    throw IoError(what + ": missing schema_version");
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw IoError(what + ": unsupported schema_version");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  return is;
}

// --- scenes.jsonl ---

inline json scene_to_json(const microworld::Scene& s) {
  json objs = json::array();
  for (const auto& o : s.objects) {
    json jo = {{"category", o.category},
               {"color", o.color},
               {"box", {o.box.x0, o.box.y0, o.box.x1, o.box.y1}}};
    if (!o.action.empty()) jo["action"] = o.action;
    objs.push_back(std::move(jo));
  }
  return json{{"schema_version", kSchemaVersion},
              {"id", s.id},
              {"canvas", {s.canvas_w, s.canvas_h}},
              {"objects", std::move(objs)}};
}

inline microworld::Scene scene_from_json(const json& j) {
  check_schema(j, "scene");
  microworld::Scene s;
  s.id = j.at("id").get<int>();
  s.canvas_w = j.at("canvas").at(0).get<double>();
  s.canvas_h = j.at("canvas").at(1).get<double>();
  for (const auto& jo : j.at("objects")) {
    microworld::ObjectInstance o;
    o.category = jo.at("category").get<std::string>();
    o.color = jo.at("color").get<std::string>();
    const auto& b = jo.at("box");
    o.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
             b.at(3).get<double>()};
    if (jo.contains("action")) o.action = jo.at("action").get<std::string>();
    s.objects.push_back(std::move(o));
  }
  return s;
}

// --- captions.jsonl ---

inline json captions_to_json(const microworld::CaptionedExample& ce) {
  std::vector<double> feat(ce.feature.data(), ce.feature.data() + ce.feature.size());
  return json{{"schema_version", kSchemaVersion},
              {"scene_id", ce.scene_id},
              {"captions", ce.captions},
              {"feature", feat}};
}

inline microworld::CaptionedExample captions_from_json(const json& j) {
  check_schema(j, "captions");
  microworld::CaptionedExample ce;
  ce.scene_id = j.at("scene_id").get<int>();
  ce.captions = j.at("captions").get<std::vector<std::vector<std::string>>>();
  auto feat = j.at("feature").get<std::vector<double>>();
  ce.feature = Eigen::Map<const Vec>(feat.data(), static_cast<Eigen::Index>(feat.size()));
  return ce;
}

// --- qa.jsonl ---

inline json qa_to_json(const microworld::QAExample& q) {
  return json{{"schema_version", kSchemaVersion},
              {"scene_id", q.scene_id},
              {"question", q.question},
              {"answer", q.answer},
              {"question_type", q.question_type},
              {"subtype", q.subtype},
              {"asked_category", q.asked_category},
              {"uses_synonym", q.uses_synonym}};
}

inline microworld::QAExample qa_from_json(const json& j) {
  check_schema(j, "qa");
  microworld::QAExample q;
  q.scene_id = j.at("scene_id").get<int>();
  q.question = j.at("question").get<std::vector<std::string>>();
  q.answer = j.at("answer").get<std::vector<std::string>>();
  q.question_type = j.at("question_type").get<std::string>();
  q.subtype = j.at("subtype").get<std::string>();
  q.asked_category = j.at("asked_category").get<std::string>();
  q.uses_synonym = j.at("uses_synonym").get<bool>();
  return q;
}

// --- generic jsonl ---

template <class T, class ToJson>
void write_jsonl(const std::string& path, const std::vector<T>& items, ToJson to_json) {
  auto os = open_out(path);
  for (const auto& it : items) os << to_json(it).dump() << "\n";
}

template <class T, class FromJson>
std::vector<T> read_jsonl(const std::string& path, FromJson from_json) {
  auto is = open_in(path);
  std::vector<T> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(from_json(j));
  }
  return out;
}

inline void write_scenes(const std::string& path, const std::vector<microworld::Scene>& v) {
  write_jsonl(path, v, scene_to_json);
}
inline std::vector<microworld::Scene> read_scenes(const std::string& path) {
  return read_jsonl<microworld::Scene>(path, scene_from_json);
}
inline void write_captions(const std::string& path,
                           const std::vector<microworld::CaptionedExample>& v) {
  write_jsonl(path, v, captions_to_json);
}
inline std::vector<microworld::CaptionedExample> read_captions(const std::string& path) {
  return read_jsonl<microworld::CaptionedExample>(path, captions_from_json);
}
inline void write_qa(const std::string& path, const std::vector<microworld::QAExample>& v) {
  write_jsonl(path, v, qa_to_json);
}
inline std::vector<microworld::QAExample> read_qa(const std::string& path) {
  return read_jsonl<microworld::QAExample>(path, qa_from_json);
}

// --- plain-text word lists / two-column tables ---

inline void write_word_list(const std::string& path, const std::vector<std::string>& words) {
  auto os = open_out(path);
  for (const auto& w : words) os << w << "\n";
}

inline std::vector<std::string> read_word_list(const std::string& path) {
  auto is = open_in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 1) throw IoError(path + ": expected one word per line");
    out.push_back(toks[0]);
  }
  return out;
}

inline void write_two_column(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& rows) {
  auto os = open_out(path);
  for (const auto& [a, b] : rows) os << a << " " << b << "\n";
}

inline std::vector<std::pair<std::string, std::string>> read_two_column(
    const std::string& path) {
  auto is = open_in(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw IoError(path + ": expected two columns");
    out.emplace_back(toks[0], toks[1]);
  }
  return out;
}

}  // namespace attseq::dataset_io
