#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "attseq/common.hpp"
#include "attseq/microworld.hpp"
#include "attseq/rng.hpp"

namespace attseq::attrnet {

using microworld::RegionBox;
using microworld::Scene;

// ---------------------------------------------------------------------------
// IoU and proposals
// ---------------------------------------------------------------------------

inline double iou(const RegionBox& a, const RegionBox& b) {
  if (!a.valid() || !b.valid()) throw DomainError("iou: invalid box");
  double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (ix <= 0 || iy <= 0) return 0.0;
  double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

struct Proposal {
  RegionBox box;
  double score = 0.0;
};

// Desk-scale proposer: jittered object boxes plus random boxes, scored by the
// best IoU against any true object box.
inline std::vector<Proposal> propose_regions(const Scene& scene, int jitters_per_object,
                                             int n_random, std::uint64_t seed) {
  Rng rng = Rng::fork(seed, "proposals", static_cast<std::uint64_t>(scene.id));
  std::vector<RegionBox> boxes;
  auto clamp_box = [&](RegionBox b) {
    b.x0 = std::clamp(b.x0, 0.0, scene.canvas_w - 1e-6);
    b.y0 = std::clamp(b.y0, 0.0, scene.canvas_h - 1e-6);
    b.x1 = std::clamp(b.x1, b.x0 + 1e-6, scene.canvas_w);
    b.y1 = std::clamp(b.y1, b.y0 + 1e-6, scene.canvas_h);
    return b;
  };
  for (const auto& o : scene.objects) {
    for (int j = 0; j < jitters_per_object; ++j) {
      double jx = rng.uniform(-0.15, 0.15) * o.box.width();
      double jy = rng.uniform(-0.15, 0.15) * o.box.height();
      double sx = rng.uniform(0.85, 1.25);
      double sy = rng.uniform(0.85, 1.25);
      RegionBox b{o.box.x0 + jx, o.box.y0 + jy, o.box.x0 + jx + o.box.width() * sx,
                  o.box.y0 + jy + o.box.height() * sy};
      boxes.push_back(clamp_box(b));
    }
  }
  for (int j = 0; j < n_random; ++j) {
    double w = rng.uniform(0.1, 0.5) * scene.canvas_w;
    double h = rng.uniform(0.1, 0.5) * scene.canvas_h;
    double x0 = rng.uniform(0.0, scene.canvas_w - w);
    double y0 = rng.uniform(0.0, scene.canvas_h - h);
    boxes.push_back(clamp_box({x0, y0, x0 + w, y0 + h}));
  }
  std::vector<Proposal> out;
  for (const auto& b : boxes) {
    double s = 0.0;
    for (const auto& o : scene.objects) s = std::max(s, iou(b, o.box));
    out.push_back({b, s});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral clustering of the IoU affinity matrix
// ---------------------------------------------------------------------------

inline Mat iou_affinity(const std::vector<RegionBox>& boxes) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      double v = iou(boxes[static_cast<size_t>(i)], boxes[static_cast<size_t>(j)]);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

// Normalized-cut objective: sum over clusters of cut(C)/vol(C). Empty clusters
// are invalid and score +inf.
inline double normalized_cut(const Mat& affinity, const std::vector<int>& assign, int m) {
  const auto n = affinity.rows();
  Vec degree = affinity.rowwise().sum();
  std::vector<double> cut(static_cast<size_t>(m), 0.0), vol(static_cast<size_t>(m), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    int ci = assign[static_cast<size_t>(i)];
    vol[static_cast<size_t>(ci)] += degree[i];
    for (Eigen::Index j = 0; j < n; ++j)
      if (assign[static_cast<size_t>(j)] != ci) cut[static_cast<size_t>(ci)] += affinity(i, j);
  }
  double total = 0.0;
  for (int c = 0; c < m; ++c) {
    if (vol[static_cast<size_t>(c)] <= 0.0) return std::numeric_limits<double>::infinity();
    total += cut[static_cast<size_t>(c)] / vol[static_cast<size_t>(c)];
  }
  return total;
}

namespace detail {

// Deterministic k-means on embedding rows; returns (assignment, inertia).
inline std::pair<std::vector<int>, double> kmeans(const Mat& points, int m, Rng& rng) {
  const auto n = points.rows();
  // k-means++ seeding
  std::vector<Eigen::Index> centers_idx;
  centers_idx.push_back(rng.uniform_int(0, n - 1));
  Vec dist2 = Vec::Constant(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers_idx.size()) < m) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = (points.row(i) - points.row(centers_idx.back())).squaredNorm();
      dist2[i] = std::min(dist2[i], d);
    }
    double total = dist2.sum();
    Eigen::Index next = 0;
    if (total <= 0) {
      next = rng.uniform_int(0, n - 1);
    } else {
      double r = rng.uniform() * total;
      double acc = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= r) { next = i; break; }
      }
    }
    centers_idx.push_back(next);
  }
  Mat centers(m, points.cols());
  for (int c = 0; c < m; ++c) centers.row(c) = points.row(centers_idx[static_cast<size_t>(c)]);

  std::vector<int> assign(static_cast<size_t>(n), 0);
  for (int iter = 0; iter < 64; ++iter) {
    bool changed = false;
    // assignment step; ties to the lower cluster id
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < m; ++c) {
        double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d - 1e-15) { best_d = d; best = c; }
      }
      if (assign[static_cast<size_t>(i)] != best) { assign[static_cast<size_t>(i)] = best; changed = true; }
    }
    // empty-cluster repair: steal the point farthest from its center
    for (int c = 0; c < m; ++c) {
      if (std::count(assign.begin(), assign.end(), c) > 0) continue;
      Eigen::Index worst = 0;
      double worst_d = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        double d = (points.row(i) - centers.row(assign[static_cast<size_t>(i)])).squaredNorm();
        if (d > worst_d && std::count(assign.begin(), assign.end(),
                                      assign[static_cast<size_t>(i)]) > 1) {
          worst_d = d;
          worst = i;
        }
      }
      assign[static_cast<size_t>(worst)] = c;
      changed = true;
    }
    // update step
    Mat sums = Mat::Zero(m, points.cols());
    std::vector<int> counts(static_cast<size_t>(m), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<size_t>(i)]) += points.row(i);
      counts[static_cast<size_t>(assign[static_cast<size_t>(i)])]++;
    }
    for (int c = 0; c < m; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        centers.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
    if (!changed && iter > 0) break;
  }
  double inertia = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    inertia += (points.row(i) - centers.row(assign[static_cast<size_t>(i)])).squaredNorm();
  return {assign, inertia};
}

}  // namespace detail

// m-way spectral partition: m smallest eigenvectors of the symmetric normalized
// Laplacian of the IoU affinity, row-normalized, then seeded k-means. Among
// k-means restarts the partition with the lowest normalized-cut objective wins.
inline std::vector<int> spectral_cluster(const std::vector<RegionBox>& boxes, int m) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  if (m < 1) throw DomainError("spectral_cluster: m must be >= 1");
  if (n < m) throw DomainError("spectral_cluster: fewer boxes than clusters");
  if (m == 1) return std::vector<int>(static_cast<size_t>(n), 0);

  Mat a = iou_affinity(boxes);
  Vec d = a.rowwise().sum();
  Vec d_inv_sqrt = d.array().inverse().sqrt();
  Mat lap = Mat::Identity(n, n) -
            d_inv_sqrt.asDiagonal() * a * d_inv_sqrt.asDiagonal();
  // guard symmetry against fp drift
  lap = 0.5 * (lap + lap.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es(lap);
  if (es.info() != Eigen::Success)
    throw NumericError("spectral_cluster: eigendecomposition failed");
  Mat embed = es.eigenvectors().leftCols(m);
  // canonical sign: largest-magnitude entry of each column made positive
  for (int c = 0; c < m; ++c) {
    Eigen::Index arg = 0;
    embed.col(c).cwiseAbs().maxCoeff(&arg);
    if (embed(arg, c) < 0) embed.col(c) = -embed.col(c);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double norm = embed.row(i).norm();
    if (norm > 1e-12) embed.row(i) /= norm;
  }

  std::vector<int> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 8; ++restart) {
    Rng rng = Rng::fork(0xC1A5, "kmeans", static_cast<std::uint64_t>(restart));
    auto [assign, inertia] = detail::kmeans(embed, m, rng);
    (void)inertia;
    double obj = normalized_cut(a, assign, m);
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best = assign;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hypothesis selection: m clusters, top-k each, plus the whole canvas
// ---------------------------------------------------------------------------

struct HypothesisSet {
  std::vector<Proposal> hypotheses;  // exactly m*k + 1; whole canvas last
  std::vector<int> cluster;          // cluster id per hypothesis; -1 for whole canvas
};

inline HypothesisSet cluster_and_select(const std::vector<Proposal>& proposals, int m,
                                        int k, const Scene& scene) {
  if (m < 1 || k < 1) throw DomainError("cluster_and_select: m and k must be >= 1");
  if (static_cast<int>(proposals.size()) < m)
    throw DomainError("cluster_and_select: fewer proposals than clusters");

  // canonical input order makes the result invariant to caller ordering
  std::vector<size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto &pa = proposals[a], &pb = proposals[b];
    return std::tie(pa.box.x0, pa.box.y0, pa.box.x1, pa.box.y1, pa.score) <
           std::tie(pb.box.x0, pb.box.y0, pb.box.x1, pb.box.y1, pb.score);
  });
  std::vector<RegionBox> boxes;
  std::vector<double> scores;
  for (size_t idx : order) {
    boxes.push_back(proposals[idx].box);
    scores.push_back(proposals[idx].score);
  }

  std::vector<int> raw_assign = spectral_cluster(boxes, m);
  // renumber clusters by first occurrence in canonical order
  std::vector<int> remap(static_cast<size_t>(m), -1);
  int next_id = 0;
  for (int c : raw_assign)
    if (remap[static_cast<size_t>(c)] < 0) remap[static_cast<size_t>(c)] = next_id++;

  std::vector<std::vector<size_t>> members(static_cast<size_t>(m));
  for (size_t i = 0; i < raw_assign.size(); ++i)
    members[static_cast<size_t>(remap[static_cast<size_t>(raw_assign[i])])].push_back(i);

  HypothesisSet out;
  for (int c = 0; c < m; ++c) {
    auto& mem = members[static_cast<size_t>(c)];
    std::sort(mem.begin(), mem.end(), [&](size_t a, size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    for (int j = 0; j < k; ++j) {
      size_t pick = mem[static_cast<size_t>(std::min<int>(j, static_cast<int>(mem.size()) - 1))];
      out.hypotheses.push_back({boxes[pick], scores[pick]});
      out.cluster.push_back(c);
    }
  }
  out.hypotheses.push_back({scene.whole_canvas(), 1.0});
  out.cluster.push_back(-1);
  return out;
}

// ---------------------------------------------------------------------------
// Element-wise logistic loss (labels remapped to ±1)
// ---------------------------------------------------------------------------

inline double softplus(double z) {
  // log(1 + exp(z)) without overflow
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// logits and labels are c x N (examples as columns); labels in {0,1}.
// J = (1/N) sum_i sum_j log(1 + exp(-(2 y - 1) s)); returns (J, dJ/ds).
inline std::pair<double, Mat> logistic_loss(const Mat& logits, const Mat& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
    throw DomainError("logistic_loss: shape mismatch");
  if (logits.cols() == 0) throw DomainError("logistic_loss: empty batch");
  const double n = static_cast<double>(logits.cols());
  double loss = 0.0;
  Mat grad(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      double y = labels(i, j);
      if (y != 0.0 && y != 1.0) throw DomainError("logistic_loss: labels must be 0/1");
      double ys = 2.0 * y - 1.0;
      double z = ys * logits(i, j);
      loss += softplus(-z);
      grad(i, j) = -ys * sigmoid(-z) / n;
    }
  }
  return {loss / n, grad};
}

// ---------------------------------------------------------------------------
// Two-layer attribute predictor
// ---------------------------------------------------------------------------

struct PredictorParams {
  Mat w1;  // hidden x in
  Vec b1;  // hidden
  Mat w2;  // c x hidden
  Vec b2;  // c

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int num_attributes() const { return static_cast<int>(w2.rows()); }
};

inline Mat xavier(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

inline PredictorParams init_predictor(int input_dim, int hidden, int c, std::uint64_t seed) {
  Rng rng = Rng::fork(seed, "predictor-init");
  PredictorParams p;
  p.w1 = xavier(hidden, input_dim, rng);
  p.b1 = Vec::Zero(hidden);
  p.w2 = xavier(c, hidden, rng);
  p.b2 = Vec::Zero(c);
  return p;
}

// Forward scores for a batch of feature columns.
inline Mat predictor_logits(const PredictorParams& p, const Mat& features) {
  Mat hidden = ((p.w1 * features).colwise() + p.b1).array().tanh().matrix();
  return (p.w2 * hidden).colwise() + p.b2;
}

struct PredictorTrainConfig {
  int hidden = 64;
  int epochs = 40;
  double lr = 0.1;
  double momentum = 0.9;
  int lr_decay_every = 10;   // epochs between rate drops
  double lr_decay = 0.1;     // multiplier at each drop
  int batch_size = 32;
  double dropout = 0.5;      // on the hidden layer, train time only
  std::uint64_t seed = 0;
};

struct PredictorTrainResult {
  PredictorParams params;
  std::vector<double> epoch_loss;
};

// SGD with momentum on the element-wise logistic loss over whole-canvas
// features; step-decay schedule.
inline PredictorTrainResult train_predictor(const Mat& features, const Mat& labels,
                                            const PredictorTrainConfig& cfg) {
  if (features.cols() != labels.cols())
    throw DomainError("train_predictor: feature/label count mismatch");
  if (features.cols() == 0) throw DomainError("train_predictor: empty dataset");

  const auto n = features.cols();
  PredictorParams p = init_predictor(static_cast<int>(features.rows()), cfg.hidden,
                                     static_cast<int>(labels.rows()), cfg.seed);
  PredictorParams vel;
  vel.w1 = Mat::Zero(p.w1.rows(), p.w1.cols());
  vel.b1 = Vec::Zero(p.b1.size());
  vel.w2 = Mat::Zero(p.w2.rows(), p.w2.cols());
  vel.b2 = Vec::Zero(p.b2.size());

  Rng shuffle_rng = Rng::fork(cfg.seed, "predictor-shuffle");
  Rng dropout_rng = Rng::fork(cfg.seed, "predictor-dropout");
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  PredictorTrainResult result;
  double lr = cfg.lr;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && cfg.lr_decay_every > 0 && epoch % cfg.lr_decay_every == 0)
      lr *= cfg.lr_decay;
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    long long seen = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Mat x(features.rows(), b), y(labels.rows(), b);
      for (Eigen::Index i = 0; i < b; ++i) {
        x.col(i) = features.col(order[static_cast<size_t>(start + i)]);
        y.col(i) = labels.col(order[static_cast<size_t>(start + i)]);
      }
      Mat pre = (p.w1 * x).colwise() + p.b1;
      Mat hidden = pre.array().tanh().matrix();
      Mat keep;
      if (cfg.dropout > 0) {
        keep = Mat(hidden.rows(), hidden.cols());
        double keep_p = 1.0 - cfg.dropout;
        for (Eigen::Index jj = 0; jj < keep.cols(); ++jj)
          for (Eigen::Index ii = 0; ii < keep.rows(); ++ii)
            keep(ii, jj) = dropout_rng.bernoulli(keep_p) ? 1.0 / keep_p : 0.0;
        hidden = hidden.cwiseProduct(keep);
      }
      Mat logits = (p.w2 * hidden).colwise() + p.b2;
      auto [loss, dlogits] = logistic_loss(logits, y);
      if (!std::isfinite(loss))
        throw TrainError("train_predictor: loss diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(b);
      seen += b;

      Mat dw2 = dlogits * hidden.transpose();
      Vec db2 = dlogits.rowwise().sum();
      Mat dhidden = p.w2.transpose() * dlogits;
      if (cfg.dropout > 0) dhidden = dhidden.cwiseProduct(keep);
      Mat dpre = dhidden.cwiseProduct(
          (1.0 - pre.array().tanh().square()).matrix());
      Mat dw1 = dpre * x.transpose();
      Vec db1 = dpre.rowwise().sum();

      vel.w1 = cfg.momentum * vel.w1 - lr * dw1;
      vel.b1 = cfg.momentum * vel.b1 - lr * db1;
      vel.w2 = cfg.momentum * vel.w2 - lr * dw2;
      vel.b2 = cfg.momentum * vel.b2 - lr * db2;
      p.w1 += vel.w1;
      p.b1 += vel.b1;
      p.w2 += vel.w2;
      p.b2 += vel.b2;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(seen));
  }
  result.params = std::move(p);
  return result;
}

// ---------------------------------------------------------------------------
// Cross-hypothesis max pooling
// ---------------------------------------------------------------------------

// Per-hypothesis sigmoid probabilities from region features, pooled by
// element-wise max into Att(I).
inline Vec predict_attributes(const Scene& scene, const PredictorParams& params,
                              const HypothesisSet& hyps,
                              const microworld::GeneratorConfig& gen_cfg,
                              const microworld::TemplateGrammar& grammar,
                              std::uint64_t corpus_seed) {
  if (hyps.hypotheses.empty()) throw DomainError("predict_attributes: empty hypothesis set");
  Vec pooled = Vec::Constant(params.num_attributes(), -std::numeric_limits<double>::infinity());
  for (size_t h = 0; h < hyps.hypotheses.size(); ++h) {
    std::uint64_t noise_seed = microworld::feature_noise_seed(
        corpus_seed, scene.id, static_cast<int>(h));
    Vec f = microworld::region_features(scene, hyps.hypotheses[h].box, noise_seed,
                                        gen_cfg, grammar);
    Vec logits = predictor_logits(params, f);
    for (Eigen::Index i = 0; i < logits.size(); ++i)
      pooled[i] = std::max(pooled[i], sigmoid(logits[i]));
  }
  return pooled;
}

}  // namespace attseq::attrnet
