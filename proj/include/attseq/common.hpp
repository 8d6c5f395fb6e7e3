#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace attseq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. The CLI maps each class to a distinct exit code.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};
struct TrainError : std::runtime_error {
  explicit TrainError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Stable hash of an ordered word list; used to pin vocabularies in checkpoints.
inline std::uint64_t hash_words(const std::vector<std::string>& words) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& w : words) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;  // separator
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string join_tokens(const std::vector<std::string>& toks,
                               const char* sep = " ") {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += sep;
    out += toks[i];
  }
  return out;
}

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace attseq
