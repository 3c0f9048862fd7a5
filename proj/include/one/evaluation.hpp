#ifndef ONE_EVALUATION_HPP
#define ONE_EVALUATION_HPP

// Outlier recall, node classification and node clustering metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "one/core.hpp"
#include "one/errors.hpp"
#include "one/io_util.hpp"
#include "one/numerics.hpp"
#include "one/seeder.hpp"

namespace one {

// ---------------------------------------------------------------------------
// Outlier ranking

/// Node ids by descending score, ties by ascending id.
using RankedList = std::vector<std::size_t>;

inline RankedList rank_by_score(std::span<const double> scores) {
  RankedList r(scores.size());
  std::iota(r.begin(), r.end(), 0);
  std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return r;
}

/// |top ceil(l% N) ∩ truth| / |truth|.
inline double recall_at(const RankedList& ranked, std::span<const std::size_t> truth, double l_percent) {
  if (truth.empty()) throw DomainError("recall_at: empty ground truth");
  if (!(l_percent > 0.0) || l_percent > 100.0) throw DomainError("recall_at: L must lie in (0, 100]");
  const auto top = std::min(ranked.size(), static_cast<std::size_t>(std::ceil(
                                               l_percent / 100.0 * static_cast<double>(ranked.size()) - 1e-9)));
  std::vector<std::size_t> t(truth.begin(), truth.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) hits += std::binary_search(t.begin(), t.end(), ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

// ---------------------------------------------------------------------------
// Classification

struct ClassifierOptions {
  double reg = 1e-3;
  std::size_t steps = 500;
  double step_size = 0.1;
};

/// Multinomial logistic regression on standardized features.
struct Classifier {
  std::size_t n_classes = 0;
  std::vector<double> mean, scale;  ///< per feature
  DenseMatrix weights;              ///< (features + 1) x classes, last row is the bias
  std::vector<double> loss_trace;   ///< objective before each step and after the last
};

namespace detail {

inline void softmax_scores(const Classifier& c, std::span<const double> x, std::vector<double>& out) {
  const std::size_t f = c.mean.size();
  out.assign(c.n_classes, 0.0);
  for (std::size_t k = 0; k < c.n_classes; ++k) {
    double s = c.weights(f, k);
    for (std::size_t j = 0; j < f; ++j) s += c.weights(j, k) * (x[j] - c.mean[j]) / c.scale[j];
    out[k] = s;
  }
}

}  // namespace detail

/// Full-batch gradient descent on mean cross-entropy + reg/2 ||W||^2 (bias excluded).
/// Rows are visited in a canonical order, so any permutation of the training
/// set yields the same model bit for bit.
inline Classifier train_classifier(const DenseMatrix& x, std::span<const std::size_t> y,
                                   const ClassifierOptions& opt = {}) {
  if (x.rows() != y.size()) throw DimensionError("train_classifier: feature rows and labels differ in count");
  if (x.rows() == 0) throw DomainError("train_classifier: empty training set");
  std::vector<std::size_t> distinct(y.begin(), y.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw DomainError("train_classifier: training data holds a single class");

  const std::size_t n = x.rows(), f = x.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (y[a] != y[b]) return y[a] < y[b];
    auto ra = x.row(a), rb = x.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });

  Classifier c;
  c.n_classes = distinct.back() + 1;
  c.mean.assign(f, 0.0);
  c.scale.assign(f, 0.0);
  for (std::size_t i : order)
    for (std::size_t j = 0; j < f; ++j) c.mean[j] += x(i, j);
  for (double& m : c.mean) m /= static_cast<double>(n);
  for (std::size_t i : order)
    for (std::size_t j = 0; j < f; ++j) c.scale[j] += (x(i, j) - c.mean[j]) * (x(i, j) - c.mean[j]);
  for (double& s : c.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }
  c.weights = DenseMatrix(f + 1, c.n_classes);

  DenseMatrix z(n, f);  // standardized rows in canonical order
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < f; ++j) z(r, j) = (x(order[r], j) - c.mean[j]) / c.scale[j];

  std::vector<double> logits(c.n_classes);
  DenseMatrix grad(f + 1, c.n_classes);
  auto objective_and_gradient = [&]() {
    std::fill(grad.data().begin(), grad.data().end(), 0.0);
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      auto zr = z.row(r);
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < c.n_classes; ++k) {
        double s = c.weights(f, k);
        for (std::size_t j = 0; j < f; ++j) s += c.weights(j, k) * zr[j];
        logits[k] = s;
        peak = std::max(peak, s);
      }
      double norm = 0.0;
      for (double& l : logits) norm += std::exp(l - peak);
      const double log_norm = peak + std::log(norm);
      const std::size_t label = y[order[r]];
      loss -= logits[label] - log_norm;
      for (std::size_t k = 0; k < c.n_classes; ++k) {
        const double g = std::exp(logits[k] - log_norm) - (k == label ? 1.0 : 0.0);
        for (std::size_t j = 0; j < f; ++j) grad(j, k) += g * zr[j];
        grad(f, k) += g;
      }
    }
    const double inv = 1.0 / static_cast<double>(n);
    loss *= inv;
    for (double& g : grad.data()) g *= inv;
    for (std::size_t j = 0; j < f; ++j)
      for (std::size_t k = 0; k < c.n_classes; ++k) {
        loss += 0.5 * opt.reg * c.weights(j, k) * c.weights(j, k);
        grad(j, k) += opt.reg * c.weights(j, k);
      }
    return loss;
  };

  for (std::size_t step = 0; step < opt.steps; ++step) {
    c.loss_trace.push_back(objective_and_gradient());
    for (std::size_t e = 0; e < grad.size(); ++e) c.weights.data()[e] -= opt.step_size * grad.data()[e];
  }
  c.loss_trace.push_back(objective_and_gradient());
  return c;
}

inline std::vector<std::size_t> predict(const Classifier& c, const DenseMatrix& x) {
  if (x.cols() != c.mean.size()) throw DimensionError("predict: feature count differs from training");
  std::vector<std::size_t> out(x.rows());
  std::vector<double> s;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    detail::softmax_scores(c, x.row(i), s);
    out[i] = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  }
  return out;
}

struct F1Pair {
  double macro = 0.0;
  double micro = 0.0;
};

/// Macro F1 averages over classes present in y_true; micro F1 pools all counts.
inline F1Pair f1_scores(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("f1_scores: length mismatch");
  if (y_true.empty()) throw DomainError("f1_scores: empty input");
  std::map<std::size_t, std::array<double, 3>> counts;  // tp, fp, fn
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) {
      counts[y_true[i]][0] += 1;
    } else {
      counts[y_pred[i]][1] += 1;
      counts[y_true[i]][2] += 1;
    }
  }
  double macro = 0.0, tp = 0.0, fp = 0.0, fn = 0.0;
  std::size_t classes = 0;
  for (const auto& [cls, c] : counts) {
    tp += c[0];
    fp += c[1];
    fn += c[2];
    if (c[0] + c[2] == 0) continue;  // absent from y_true
    ++classes;
    const double denom = 2 * c[0] + c[1] + c[2];
    macro += denom > 0 ? 2 * c[0] / denom : 0.0;
  }
  return {macro / static_cast<double>(classes), 2 * tp / (2 * tp + fp + fn)};
}

// ---------------------------------------------------------------------------
// Clustering

struct KMeansResult {
  std::vector<std::size_t> assignment;
  DenseMatrix centroids;
  std::vector<double> wcss_trace;  ///< within-cluster sum of squares after each assignment step
  std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace detail

/// k-means with D^2 seeding and Lloyd iterations until the assignment repeats.
/// An emptied cluster is moved onto the point farthest from its own centroid.
inline KMeansResult kmeans_pp(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                              std::size_t max_iters = 300) {
  const std::size_t n = points.rows(), f = points.cols();
  if (k == 0 || k > n) throw DomainError("kmeans_pp: need 1 <= k <= number of points");
  Rng rng(seed);
  KMeansResult r;
  r.centroids = DenseMatrix(k, f);
  std::vector<std::size_t> chosen{rng.uniform_index(n)};
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    for (std::size_t i = 0; i < n; ++i)
      best[i] = std::min(best[i], detail::sq_dist(points.row(i), points.row(chosen.back())));
    double total = 0.0;
    for (double b : best) total += b;
    chosen.push_back(total > 0.0 ? rng.weighted_index(best) : rng.uniform_index(n));
  }
  for (std::size_t c = 0; c < k; ++c)
    std::copy(points.row(chosen[c]).begin(), points.row(chosen[c]).end(), r.centroids.row(c).begin());

  r.assignment.assign(n, k);  // k marks "unassigned"
  std::vector<std::size_t> next(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double bd = detail::sq_dist(points.row(i), r.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double d = detail::sq_dist(points.row(i), r.centroids.row(c));
        if (d < bd) {
          bd = d;
          arg = c;
        }
      }
      next[i] = arg;
      wcss += bd;
    }
    r.wcss_trace.push_back(wcss);
    r.iterations = it + 1;
    if (next == r.assignment) break;
    r.assignment = next;

    DenseMatrix sums(k, f);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[r.assignment[i]];
      auto s = sums.row(r.assignment[i]);
      auto p = points.row(i);
      for (std::size_t j = 0; j < f; ++j) s[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (sizes[c] > 0)
        for (std::size_t j = 0; j < f; ++j) r.centroids(c, j) = sums(c, j) / static_cast<double>(sizes[c]);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = detail::sq_dist(points.row(i), r.centroids.row(r.assignment[i]));
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      std::copy(points.row(far).begin(), points.row(far).end(), r.centroids.row(c).begin());
    }
  }
  return r;
}

/// Maximum-weight assignment on a rows x cols profit matrix (Hungarian method on
/// the padded square cost). Returns, for each row, its column or SIZE_MAX.
inline std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& profit) {
  const std::size_t rows = profit.size();
  const std::size_t cols = rows ? profit[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  double top = 0.0;
  for (const auto& r : profit)
    for (double v : r) top = std::max(top, v);
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? top - profit[i][j] : top;
  };
  // 1-based potentials formulation.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> out(rows, SIZE_MAX);
  for (std::size_t j = 1; j <= n; ++j)
    if (match[j] >= 1 && match[j] <= rows && j <= cols) out[match[j] - 1] = j - 1;
  return out;
}

/// Best agreement between clusters and classes over injective relabelings.
inline double clustering_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  if (pred.size() != truth.size()) throw DimensionError("clustering_accuracy: length mismatch");
  if (pred.empty()) throw DomainError("clustering_accuracy: empty input");
  auto dense_ids = [](std::span<const std::size_t> v) {
    std::vector<std::size_t> u(v.begin(), v.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<std::size_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = static_cast<std::size_t>(std::lower_bound(u.begin(), u.end(), v[i]) - u.begin());
    return std::pair{out, u.size()};
  };
  const auto [p, np] = dense_ids(pred);
  const auto [t, nt] = dense_ids(truth);
  std::vector<std::vector<double>> confusion(np, std::vector<double>(nt, 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) confusion[p[i]][t[i]] += 1.0;
  const auto match = max_weight_assignment(confusion);
  double agree = 0.0;
  for (std::size_t c = 0; c < np; ++c)
    if (match[c] != SIZE_MAX) agree += confusion[c][match[c]];
  return agree / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Full report

struct EvalOptions {
  std::vector<int> recall_levels{5, 10, 15, 20, 25};
  std::vector<int> train_percents{10, 20, 30, 40, 50};
  std::size_t reps = 10;
  std::uint64_t seed = 0;
  bool exclude_outliers = false;  ///< drop planted nodes from classification and clustering
  ClassifierOptions classifier;
  std::size_t kmeans_iters = 300;
};

struct EvalReport {
  std::map<int, double> recall_at;
  std::map<int, F1Pair> f1;
  double clustering_accuracy = 0.0;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["recall_at"] = nlohmann::json::object();
    for (auto [l, v] : recall_at) j["recall_at"][std::to_string(l)] = v;
    j["f1"] = nlohmann::json::object();
    for (auto [p, v] : f1) j["f1"][std::to_string(p)] = {{"macro", v.macro}, {"micro", v.micro}};
    j["clustering_accuracy"] = clustering_accuracy;
    j["config"] = config;
    return j;
  }

  static EvalReport from_json(const nlohmann::json& j) {
    EvalReport r;
    for (const auto& [k, v] : j.at("recall_at").items()) r.recall_at[std::stoi(k)] = v.get<double>();
    for (const auto& [k, v] : j.at("f1").items())
      r.f1[std::stoi(k)] = {v.at("macro").get<double>(), v.at("micro").get<double>()};
    r.clustering_accuracy = j.at("clustering_accuracy").get<double>();
    r.config = j.at("config");
    return r;
  }

  /// Three tab-separated blocks separated by blank lines.
  std::string to_tsv() const {
    std::string s = "top_percent\trecall\n";
    for (auto [l, v] : recall_at) s += std::to_string(l) + '\t' + io::format_double(v) + '\n';
    s += "\ntrain_percent\tmacro_f1\tmicro_f1\n";
    for (auto [p, v] : f1) s += std::to_string(p) + '\t' + io::format_double(v.macro) + '\t' + io::format_double(v.micro) + '\n';
    s += "\nmetric\tvalue\nclustering_accuracy\t" + io::format_double(clustering_accuracy) + '\n';
    return s;
  }

  friend bool operator==(const EvalReport& a, const EvalReport& b) {
    auto same_f1 = [](const std::map<int, F1Pair>& x, const std::map<int, F1Pair>& y) {
      if (x.size() != y.size()) return false;
      for (auto ix = x.begin(), iy = y.begin(); ix != x.end(); ++ix, ++iy)
        if (ix->first != iy->first || ix->second.macro != iy->second.macro || ix->second.micro != iy->second.micro)
          return false;
      return true;
    };
    return a.recall_at == b.recall_at && same_f1(a.f1, b.f1) && a.clustering_accuracy == b.clustering_accuracy &&
           a.config == b.config;
  }
};

/// Evaluates an embedding and an outlier score vector against labels and planted ids.
inline EvalReport evaluate(std::span<const std::size_t> labels, std::span<const std::size_t> outlier_ids,
                           const DenseMatrix& embedding, std::span<const double> outlier_scores,
                           const EvalOptions& opt = {}) {
  const std::size_t n = labels.size();
  if (embedding.rows() != n || outlier_scores.size() != n)
    throw DimensionError("evaluate: embedding, scores and labels disagree on node count");
  EvalReport rep;

  if (!outlier_ids.empty()) {
    const RankedList ranked = rank_by_score(outlier_scores);
    for (int l : opt.recall_levels) rep.recall_at[l] = recall_at(ranked, outlier_ids, l);
  }

  std::vector<std::size_t> nodes;
  {
    std::vector<bool> planted(n, false);
    for (std::size_t id : outlier_ids) planted.at(id) = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!(opt.exclude_outliers && planted[i])) nodes.push_back(i);
  }
  std::vector<std::size_t> y(nodes.size());
  for (std::size_t r = 0; r < nodes.size(); ++r) y[r] = labels[nodes[r]];

  auto gather = [&](const std::vector<std::size_t>& rows) {
    DenseMatrix m(rows.size(), embedding.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
      std::copy(embedding.row(rows[r]).begin(), embedding.row(rows[r]).end(), m.row(r).begin());
    return m;
  };

  const std::uint64_t split_seed = Rng::derive_seed(opt.seed, "splits");
  for (int pct : opt.train_percents) {
    F1Pair mean;
    for (std::size_t rep_i = 0; rep_i < opt.reps; ++rep_i) {
      Rng rng(Rng::derive_seed(split_seed, static_cast<std::uint64_t>(pct) * 1000 + rep_i));
      std::vector<std::size_t> perm(nodes.size());
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      const auto n_train = static_cast<std::size_t>(
          std::llround(static_cast<double>(pct) / 100.0 * static_cast<double>(nodes.size())));
      if (n_train == 0 || n_train >= nodes.size()) throw DomainError("evaluate: train split leaves an empty side");
      std::vector<std::size_t> train_rows, test_rows, train_y, test_y;
      for (std::size_t r = 0; r < perm.size(); ++r) {
        (r < n_train ? train_rows : test_rows).push_back(nodes[perm[r]]);
        (r < n_train ? train_y : test_y).push_back(y[perm[r]]);
      }
      const Classifier clf = train_classifier(gather(train_rows), train_y, opt.classifier);
      const F1Pair f = f1_scores(test_y, predict(clf, gather(test_rows)));
      mean.macro += f.macro;
      mean.micro += f.micro;
    }
    if (opt.reps > 0) {
      mean.macro /= static_cast<double>(opt.reps);
      mean.micro /= static_cast<double>(opt.reps);
      rep.f1[pct] = mean;
    }
  }

  std::vector<std::size_t> classes(y);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const KMeansResult km = kmeans_pp(gather(nodes), classes.size(), Rng::derive_seed(opt.seed, "kmeans"), opt.kmeans_iters);
  rep.clustering_accuracy = clustering_accuracy(km.assignment, y);

  rep.config = {{"seed", opt.seed},
                {"reps", opt.reps},
                {"train_percents", opt.train_percents},
                {"recall_levels", opt.recall_levels},
                {"exclude_outliers", opt.exclude_outliers},
                {"clusters", classes.size()},
                {"classifier",
                 {{"model", "multinomial_logistic_regression"},
                  {"reg", opt.classifier.reg},
                  {"steps", opt.classifier.steps},
                  {"step_size", opt.classifier.step_size}}}};
  return rep;
}

inline EvalReport evaluate_all(const SeededDataset& seeded, const EmbeddingResult& result, const EvalOptions& opt = {}) {
  if (!seeded.network.labels) throw StateError("evaluate_all: seeded network has no labels");
  const auto ids = seeded.all_outliers();
  return evaluate(*seeded.network.labels, ids, result.embedding, result.combined, opt);
}

}  // namespace one

#endif  // ONE_EVALUATION_HPP
