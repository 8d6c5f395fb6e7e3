#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "attseq/common.hpp"

namespace attseq::metrics {

using TokenSeq = std::vector<std::string>;

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

namespace detail {

inline std::map<std::string, long long> ngram_counts(const TokenSeq& toks, int n) {
  std::map<std::string, long long> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (size_t i = 0; i + static_cast<size_t>(n) <= toks.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += toks[i + static_cast<size_t>(j)];
    }
    counts[key]++;
  }
  return counts;
}

}  // namespace detail

// Corpus-level BLEU-n: clipped n-gram precision, geometric mean over orders
// 1..n, brevity penalty exp(1 - r/c) for c < r with r accumulated from the
// closest reference length per candidate (ties favor the shorter reference).
inline double bleu(const std::vector<TokenSeq>& candidates,
                   const std::vector<std::vector<TokenSeq>>& reference_sets, int n,
                   double smoothing_eps = 0.0) {
  if (n < 1 || n > 4) throw DomainError("bleu: n must be in 1..4");
  if (candidates.empty()) throw DomainError("bleu: empty candidate corpus");
  if (candidates.size() != reference_sets.size())
    throw DomainError("bleu: candidate/reference count mismatch");

  std::vector<long long> correct(static_cast<size_t>(n), 0);
  std::vector<long long> total(static_cast<size_t>(n), 0);
  long long cand_len = 0, ref_len = 0;

  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    const auto& refs = reference_sets[i];
    if (refs.empty()) throw DomainError("bleu: candidate without references");

    cand_len += static_cast<long long>(cand.size());
    long long closest = static_cast<long long>(refs[0].size());
    for (const auto& r : refs) {
      auto len = static_cast<long long>(r.size());
      auto diff = std::llabs(len - static_cast<long long>(cand.size()));
      auto best = std::llabs(closest - static_cast<long long>(cand.size()));
      if (diff < best || (diff == best && len < closest)) closest = len;
    }
    ref_len += closest;

    for (int order = 1; order <= n; ++order) {
      auto cand_counts = detail::ngram_counts(cand, order);
      std::map<std::string, long long> max_ref;
      for (const auto& r : refs)
        for (const auto& [g, c] : detail::ngram_counts(r, order))
          max_ref[g] = std::max(max_ref[g], c);
      for (const auto& [g, c] : cand_counts) {
        total[static_cast<size_t>(order - 1)] += c;
        auto it = max_ref.find(g);
        if (it != max_ref.end())
          correct[static_cast<size_t>(order - 1)] += std::min(c, it->second);
      }
    }
  }

  double log_precision = 0.0;
  for (int order = 0; order < n; ++order) {
    double num = static_cast<double>(correct[static_cast<size_t>(order)]) + smoothing_eps;
    double den = static_cast<double>(total[static_cast<size_t>(order)]) + smoothing_eps;
    if (num <= 0.0 || den <= 0.0) return 0.0;
    log_precision += std::log(num / den);
  }
  double bp = 1.0;
  if (cand_len == 0) return 0.0;
  if (cand_len < ref_len)
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_precision / n);
}

// ---------------------------------------------------------------------------
// Perplexity
// ---------------------------------------------------------------------------

// Accumulates per-word code lengths in bits; PPL = 2^(bits/words).
class PerplexityAccumulator {
 public:
  void add_prob(double p) {
    if (p <= 0.0) {
      zero_prob_words_++;
      return;
    }
    bits_ += -std::log2(p);
    words_++;
  }

  void add_neg_log2(double neg_log2_p) {
    bits_ += neg_log2_p;
    words_++;
  }

  long long words() const { return words_ + zero_prob_words_; }
  long long zero_probability_words() const { return zero_prob_words_; }

  double value() const {
    if (words() == 0) throw DomainError("perplexity: no words scored");
    if (zero_prob_words_ > 0) return std::numeric_limits<double>::infinity();
    return std::exp2(bits_ / static_cast<double>(words_));
  }

 private:
  double bits_ = 0.0;
  long long words_ = 0;
  long long zero_prob_words_ = 0;
};

// ---------------------------------------------------------------------------
// Taxonomy tree and Wu-Palmer similarity
// ---------------------------------------------------------------------------

class TaxonomyTree {
 public:
  TaxonomyTree() = default;

  // parent_of: child -> parent; root has no entry.
  TaxonomyTree(std::string root, std::map<std::string, std::string> parent_of)
      : root_(std::move(root)), parent_(std::move(parent_of)) {
    depth_[root_] = 1;
    for (const auto& [child, p] : parent_) {
      (void)p;
      depth_of(child);  // materializes depths, detects cycles/dangling parents
    }
  }

  bool contains(const std::string& w) const {
    return w == root_ || parent_.count(w) > 0;
  }

  int depth(const std::string& w) const {
    auto it = depth_.find(w);
    if (it == depth_.end()) throw DomainError("taxonomy: unknown word " + w);
    return it->second;
  }

  std::string lca(const std::string& a, const std::string& b) const {
    std::string x = a, y = b;
    int dx = depth(x), dy = depth(y);
    while (dx > dy) { x = parent_.at(x); --dx; }
    while (dy > dx) { y = parent_.at(y); --dy; }
    while (x != y) {
      x = parent_.at(x);
      y = parent_.at(y);
    }
    return x;
  }

  const std::string& root() const { return root_; }

 private:
  int depth_of(const std::string& w) {
    auto it = depth_.find(w);
    if (it != depth_.end()) return it->second;
    auto pit = parent_.find(w);
    if (pit == parent_.end())
      throw DomainError("taxonomy: word has no path to root: " + w);
    if (visiting_.count(w)) throw DomainError("taxonomy: cycle at " + w);
    visiting_.insert(w);
    int d = depth_of(pit->second) + 1;
    visiting_.erase(w);
    depth_[w] = d;
    return d;
  }

  std::string root_;
  std::map<std::string, std::string> parent_;
  std::map<std::string, int> depth_;
  std::set<std::string> visiting_;
};

inline double wup_similarity(const TaxonomyTree& tree, const std::string& a,
                             const std::string& b) {
  if (!tree.contains(a)) throw DomainError("wup: word not in taxonomy: " + a);
  if (!tree.contains(b)) throw DomainError("wup: word not in taxonomy: " + b);
  double lca_depth = tree.depth(tree.lca(a, b));
  return 2.0 * lca_depth / (tree.depth(a) + tree.depth(b));
}

// Per-example score: the raw WUP when it clears the threshold, down-weighted
// by 0.1 otherwise; averaged over examples.
inline double wups(const std::vector<std::string>& predictions,
                   const std::vector<std::string>& gold, const TaxonomyTree& tree,
                   double threshold) {
  if (predictions.empty()) throw DomainError("wups: empty evaluation set");
  if (predictions.size() != gold.size())
    throw DomainError("wups: prediction/gold length mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    double w = wup_similarity(tree, predictions[i], gold[i]);
    sum += (w >= threshold) ? w : 0.1 * w;
  }
  return sum / static_cast<double>(predictions.size());
}

// Taxonomy file: "root <word>" on the first line, then "child parent" rows.
inline void save_taxonomy(const std::string& path, const std::string& root,
                          const std::map<std::string, std::string>& parent_of) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "root " << root << "\n";
  for (const auto& [child, parent] : parent_of) os << child << " " << parent << "\n";
}

inline TaxonomyTree load_taxonomy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::string line;
  std::string root;
  std::map<std::string, std::string> parent_of;
  bool first = true;
  while (std::getline(is, line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (first) {
      if (toks.size() != 2 || toks[0] != "root")
        throw IoError(path + ": expected 'root <word>' declaration");
      root = toks[1];
      first = false;
      continue;
    }
    if (toks.size() != 2) throw IoError(path + ": expected 'child parent' rows");
    parent_of[toks[0]] = toks[1];
  }
  if (first) throw IoError(path + ": empty taxonomy file");
  return TaxonomyTree(root, parent_of);
}

// ---------------------------------------------------------------------------
// Exact-match accuracy
// ---------------------------------------------------------------------------

inline double accuracy(const std::vector<TokenSeq>& predictions,
                       const std::vector<TokenSeq>& gold) {
  if (predictions.size() != gold.size())
    throw DomainError("accuracy: prediction/gold length mismatch");
  if (predictions.empty()) throw DomainError("accuracy: empty evaluation set");
  long long correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == gold[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------------------
// Report container
// ---------------------------------------------------------------------------

struct MetricReport {
  std::map<std::string, double> scores;
  std::map<std::string, long long> counts;
};

}  // namespace attseq::metrics
