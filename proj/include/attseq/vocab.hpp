#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "attseq/common.hpp"

namespace attseq::vocab {

using TokenSeq = std::vector<std::string>;
using MergeMap = std::map<std::string, std::string>;

inline std::string canonical(const std::string& w, const MergeMap& merge) {
  auto it = merge.find(w);
  return it == merge.end() ? w : it->second;
}

// ---------------------------------------------------------------------------
// Attribute vocabulary: the c most frequent canonical words in the corpus.
// ---------------------------------------------------------------------------

class AttributeVocab {
 public:
  AttributeVocab() = default;

  // Keeps only merge entries whose target is an attribute word, so the stored
  // map always points into words.
  AttributeVocab(std::vector<std::string> words, const MergeMap& merge)
      : words_(std::move(words)) {
    for (size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], static_cast<int>(i)).second)
        throw DomainError("attribute vocab: duplicate word " + words_[i]);
    }
    for (const auto& [surface, target] : merge)
      if (index_.count(target) > 0) merge_.emplace(surface, target);
  }

  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  const MergeMap& merge_map() const { return merge_; }

  // -1 when the (canonicalized) word is not an attribute.
  int index_of(const std::string& w) const {
    auto it = index_.find(canonical(w, merge_));
    return it == index_.end() ? -1 : it->second;
  }

  std::uint64_t hash() const { return hash_words(words_); }

 private:
  std::vector<std::string> words_;
  MergeMap merge_;
  std::unordered_map<std::string, int> index_;
};

// Most common canonical words; ties broken lexicographically.
inline AttributeVocab mine_attributes(const std::vector<TokenSeq>& corpus, int c,
                                      const MergeMap& merge) {
  if (corpus.empty()) throw DomainError("mine_attributes: empty corpus");
  std::map<std::string, long long> freq;
  for (const auto& toks : corpus)
    for (const auto& t : toks) freq[canonical(t, merge)]++;
  if (c > static_cast<int>(freq.size()))
    throw DomainError("mine_attributes: c exceeds distinct canonical words (" +
                      std::to_string(freq.size()) + ")");
  std::vector<std::pair<std::string, long long>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(c));
  for (int i = 0; i < c; ++i) words.push_back(items[static_cast<size_t>(i)].first);
  return AttributeVocab(std::move(words), merge);
}

// Binary indicator over the attribute vocabulary: entry j = 1 iff canonical
// word j appears in any caption of the scene.
inline Vec ground_truth_attributes(const std::vector<TokenSeq>& captions,
                                   const AttributeVocab& vocab) {
  Vec v = Vec::Zero(vocab.size());
  for (const auto& cap : captions)
    for (const auto& tok : cap)
      if (int idx = vocab.index_of(tok); idx >= 0) v[idx] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Word dictionary with reserved START / END / UNK ids.
// ---------------------------------------------------------------------------

class WordDict {
 public:
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kUnk = 2;

  WordDict() = default;
  explicit WordDict(std::vector<std::string> words) : words_(std::move(words)) {
    for (size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], static_cast<int>(i) + kReserved).second)
        throw DomainError("word dict: duplicate token " + words_[i]);
    }
  }

  // Total id count including the reserved tokens (softmax dimension).
  int size() const { return static_cast<int>(words_.size()) + kReserved; }

  bool contains(const std::string& w) const { return index_.count(w) > 0; }

  int encode(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? kUnk : it->second;
  }

  std::vector<int> encode(const TokenSeq& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(encode(t));
    return out;
  }

  std::string decode(int id) const {
    switch (id) {
      case kStart: return "<start>";
      case kEnd: return "<end>";
      case kUnk: return "<unk>";
      default: break;
    }
    int i = id - kReserved;
    if (i < 0 || i >= static_cast<int>(words_.size()))
      throw DomainError("word dict: id out of range: " + std::to_string(id));
    return words_[static_cast<size_t>(i)];
  }

  TokenSeq decode(const std::vector<int>& ids) const {
    TokenSeq out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(decode(id));
    return out;
  }

  static bool reserved(int id) { return id < kReserved; }

  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t hash() const { return hash_words(words_); }

 private:
  static constexpr int kReserved = 3;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// Tokens with corpus frequency >= min_count, in (frequency desc, word asc) order.
inline WordDict build_word_dict(const std::vector<TokenSeq>& corpus, int min_count) {
  if (corpus.empty()) throw DomainError("build_word_dict: empty corpus");
  if (min_count < 1) throw DomainError("build_word_dict: min_count must be >= 1");
  std::map<std::string, long long> freq;
  for (const auto& toks : corpus)
    for (const auto& t : toks) freq[t]++;
  std::vector<std::pair<std::string, long long>> items;
  for (const auto& kv : freq)
    if (kv.second >= min_count) items.push_back(kv);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(items.size());
  for (auto& [w, f] : items) {
    (void)f;
    words.push_back(w);
  }
  return WordDict(std::move(words));
}

}  // namespace attseq::vocab
