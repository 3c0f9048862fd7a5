#ifndef ONE_NETWORK_HPP
#define ONE_NETWORK_HPP

// Attributed network model, text-file ingestion and result persistence.
//
// Edge file       <src> <dst> [weight]      ('#' comments, optional first line %directed)
// Attribute file  <id> <v1> <v2> ...  or  <id> <idx>:<val> ...   (optional %dim D header)
// Label file      <id> <class_name>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "one/errors.hpp"
#include "one/io_util.hpp"
#include "one/numerics.hpp"

namespace one {

struct LoadMetadata {
  std::size_t self_loops = 0;
  std::size_t duplicate_edges = 0;
  std::vector<std::string> warnings;
};

struct AttributedNetwork {
  SparseMatrix adjacency;                           ///< N x N, symmetric unless directed
  DenseMatrix attributes;                           ///< N x D
  std::optional<std::vector<std::size_t>> labels;   ///< dense class ids
  std::vector<std::string> class_names;             ///< class id -> name
  std::vector<std::string> node_names;              ///< index -> external id
  bool directed = false;
  LoadMetadata metadata;

  std::size_t n_nodes() const noexcept { return adjacency.rows(); }
  std::size_t n_attributes() const noexcept { return attributes.cols(); }
  std::size_t n_classes() const noexcept { return class_names.size(); }
  bool has_labels() const noexcept { return labels.has_value(); }

  /// Number of edges; an undirected edge stored in both directions counts once.
  std::size_t n_edges() const {
    if (directed) return adjacency.nnz();
    std::size_t count = 0;
    for (std::size_t i = 0; i < adjacency.rows(); ++i)
      for (std::size_t j : adjacency.row_cols(i))
        if (j >= i) ++count;
    return count;
  }

  /// Count of distinct neighbours of node i (self loops excluded).
  std::size_t degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::size_t j : adjacency.row_cols(i))
      if (j != i) ++d;
    return d;
  }
};

namespace detail {

struct RawRow {
  std::string id;
  std::vector<std::pair<std::size_t, double>> sparse;
  std::vector<double> dense;
  bool is_sparse = true;
  std::size_t line = 0;
};

inline bool is_comment_or_blank(std::string_view line) {
  auto t = io::trim(line);
  return t.empty() || t.front() == '#';
}

inline std::vector<std::string> sorted_class_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const bool numeric = std::all_of(names.begin(), names.end(),
                                   [](const std::string& s) { return io::parse_index(s).has_value(); });
  if (numeric)
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return *io::parse_index(a) < *io::parse_index(b);
    });
  return names;
}

}  // namespace detail

/// Reads an attributed network. Ids that are all non-negative integers are used
/// as indices directly; otherwise nodes are indexed in attribute-file order.
inline AttributedNetwork load_network(const std::filesystem::path& edge_path,
                                      const std::filesystem::path& attr_path,
                                      const std::optional<std::filesystem::path>& label_path = std::nullopt) {
  AttributedNetwork net;

  // Attributes.
  const auto attr_lines = io::read_lines(attr_path);
  std::optional<std::size_t> declared_dim;
  std::vector<detail::RawRow> rows;
  std::size_t dense_width = 0, max_sparse_index = 0;
  bool any_dense = false, any_sparse_entry = false;
  for (std::size_t ln = 0; ln < attr_lines.size(); ++ln) {
    const std::string_view line = attr_lines[ln];
    if (detail::is_comment_or_blank(line)) continue;
    auto toks = io::split_ws(line);
    if (toks[0].front() == '%') {
      if (toks[0] == "%dim" && toks.size() == 2) {
        auto d = io::parse_index(toks[1]);
        if (!d) throw ParseError(attr_path.string(), ln + 1, "bad %dim value");
        declared_dim = *d;
        continue;
      }
      throw ParseError(attr_path.string(), ln + 1, "unknown directive");
    }
    detail::RawRow row;
    row.id = std::string(toks[0]);
    row.line = ln + 1;
    const bool sparse = toks.size() == 1 || toks[1].find(':') != std::string_view::npos;
    row.is_sparse = sparse;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      if (sparse) {
        auto colon = toks[t].find(':');
        if (colon == std::string_view::npos)
          throw ParseError(attr_path.string(), ln + 1, "mixed dense and sparse tokens");
        auto idx = io::parse_index(toks[t].substr(0, colon));
        auto val = io::parse_double(toks[t].substr(colon + 1));
        if (!idx || !val || !std::isfinite(*val))
          throw ParseError(attr_path.string(), ln + 1, "bad sparse token '" + std::string(toks[t]) + "'");
        row.sparse.emplace_back(*idx, *val);
        max_sparse_index = std::max(max_sparse_index, *idx);
        any_sparse_entry = true;
      } else {
        auto val = io::parse_double(toks[t]);
        if (!val || !std::isfinite(*val))
          throw ParseError(attr_path.string(), ln + 1, "bad attribute value '" + std::string(toks[t]) + "'");
        row.dense.push_back(*val);
      }
    }
    if (!sparse) {
      if (any_dense && row.dense.size() != dense_width)
        throw ParseError(attr_path.string(), ln + 1, "dense row length differs from earlier rows");
      dense_width = row.dense.size();
      any_dense = true;
    }
    rows.push_back(std::move(row));
  }
  std::size_t dim = std::max(dense_width, any_sparse_entry ? max_sparse_index + 1 : 0);
  if (declared_dim) {
    if (dim > *declared_dim || (any_dense && dense_width != *declared_dim))
      throw ConsistencyError(attr_path.string() + ": attributes exceed declared %dim");
    dim = *declared_dim;
  }

  // Edges.
  const auto edge_lines = io::read_lines(edge_path);
  struct RawEdge {
    std::string src, dst;
    double w;
    std::size_t line;
  };
  std::vector<RawEdge> raw_edges;
  bool first_content = true;
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    const std::string_view line = edge_lines[ln];
    if (detail::is_comment_or_blank(line)) continue;
    auto toks = io::split_ws(line);
    if (toks[0].front() == '%') {
      if (first_content && toks.size() == 1 && (toks[0] == "%directed" || toks[0] == "%undirected")) {
        net.directed = toks[0] == "%directed";
        first_content = false;
        continue;
      }
      throw ParseError(edge_path.string(), ln + 1, "unexpected directive");
    }
    first_content = false;
    if (toks.size() < 2 || toks.size() > 3)
      throw ParseError(edge_path.string(), ln + 1, "expected '<src> <dst> [weight]'");
    double w = 1.0;
    if (toks.size() == 3) {
      auto v = io::parse_double(toks[2]);
      if (!v || !std::isfinite(*v) || *v <= 0.0)
        throw ParseError(edge_path.string(), ln + 1, "edge weight must be a positive number");
      w = *v;
    }
    raw_edges.push_back({std::string(toks[0]), std::string(toks[1]), w, ln + 1});
  }

  // Labels.
  std::vector<std::pair<std::string, std::string>> raw_labels;
  if (label_path) {
    const auto label_lines = io::read_lines(*label_path);
    for (std::size_t ln = 0; ln < label_lines.size(); ++ln) {
      const std::string_view line = label_lines[ln];
      if (detail::is_comment_or_blank(line)) continue;
      auto toks = io::split_ws(line);
      if (toks.size() != 2) throw ParseError(label_path->string(), ln + 1, "expected '<node_id> <class_name>'");
      raw_labels.emplace_back(std::string(toks[0]), std::string(toks[1]));
    }
  }

  // Node indexing.
  bool numeric = true;
  std::size_t max_id = 0;
  auto note = [&](const std::string& id) {
    if (!numeric) return;
    auto v = io::parse_index(id);
    if (!v) numeric = false;
    else max_id = std::max(max_id, *v);
  };
  for (const auto& r : rows) note(r.id);
  for (const auto& e : raw_edges) {
    note(e.src);
    note(e.dst);
  }
  for (const auto& l : raw_labels) note(l.first);

  std::unordered_map<std::string, std::size_t> index_of;
  std::size_t n = 0;
  if (numeric && (!rows.empty() || !raw_edges.empty())) {
    n = max_id + 1;
    net.node_names.resize(n);
    for (std::size_t i = 0; i < n; ++i) net.node_names[i] = std::to_string(i);
  } else {
    for (const auto& r : rows) {
      if (!index_of.emplace(r.id, net.node_names.size()).second)
        throw ConsistencyError(attr_path.string() + ":" + std::to_string(r.line) + ": duplicate node id '" + r.id + "'");
      net.node_names.push_back(r.id);
    }
    n = net.node_names.size();
  }
  auto resolve = [&](const std::string& id, const std::string& file, std::size_t line) -> std::size_t {
    if (numeric) return *io::parse_index(id);
    auto it = index_of.find(id);
    if (it == index_of.end())
      throw ConsistencyError(file + ":" + std::to_string(line) + ": node '" + id + "' has no attribute row");
    return it->second;
  };

  if (rows.size() != n)
    throw ConsistencyError(attr_path.string() + ": " + std::to_string(rows.size()) +
                           " attribute rows for " + std::to_string(n) + " nodes");
  net.attributes = DenseMatrix(n, dim);
  std::vector<bool> seen(n, false);
  for (const auto& r : rows) {
    const std::size_t i = resolve(r.id, attr_path.string(), r.line);
    if (seen[i]) throw ConsistencyError(attr_path.string() + ":" + std::to_string(r.line) + ": duplicate node id '" + r.id + "'");
    seen[i] = true;
    if (r.is_sparse) {
      for (auto [idx, val] : r.sparse) net.attributes(i, idx) = val;
    } else {
      std::copy(r.dense.begin(), r.dense.end(), net.attributes.row(i).begin());
    }
  }

  std::vector<Triplet> triplets;
  std::unordered_set<std::uint64_t> present;
  auto key = [n](std::size_t i, std::size_t j) { return static_cast<std::uint64_t>(i) * n + j; };
  auto add = [&](std::size_t i, std::size_t j, double w) {
    if (!present.insert(key(i, j)).second) return false;
    triplets.push_back({i, j, w});
    return true;
  };
  for (const auto& e : raw_edges) {
    const std::size_t i = resolve(e.src, edge_path.string(), e.line);
    const std::size_t j = resolve(e.dst, edge_path.string(), e.line);
    if (present.count(key(i, j))) {
      ++net.metadata.duplicate_edges;
      continue;
    }
    if (i == j) ++net.metadata.self_loops;
    add(i, j, e.w);
    if (!net.directed && i != j) add(j, i, e.w);
  }
  if (net.metadata.self_loops)
    net.metadata.warnings.push_back(std::to_string(net.metadata.self_loops) + " self loop(s) kept");
  if (net.metadata.duplicate_edges)
    net.metadata.warnings.push_back(std::to_string(net.metadata.duplicate_edges) + " duplicate edge(s) ignored");
  net.adjacency = SparseMatrix::from_triplets(n, n, std::move(triplets));

  if (label_path) {
    std::vector<std::string> names;
    for (const auto& l : raw_labels) names.push_back(l.second);
    net.class_names = detail::sorted_class_names(std::move(names));
    std::map<std::string, std::size_t> class_id;
    for (std::size_t c = 0; c < net.class_names.size(); ++c) class_id[net.class_names[c]] = c;
    std::vector<std::size_t> labels(n, SIZE_MAX);
    for (const auto& [id, cls] : raw_labels) {
      const std::size_t i = resolve(id, label_path->string(), 0);
      if (labels[i] != SIZE_MAX && labels[i] != class_id[cls])
        throw ConsistencyError(label_path->string() + ": conflicting labels for node '" + id + "'");
      labels[i] = class_id[cls];
    }
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == SIZE_MAX)
        throw ConsistencyError(label_path->string() + ": node '" + net.node_names[i] + "' has no label");
    net.labels = std::move(labels);
  }
  return net;
}

struct NetworkPaths {
  std::filesystem::path edges;
  std::filesystem::path attributes;
  std::filesystem::path labels;  ///< empty when the network is unlabeled
};

/// Writes the network in the three input formats (sparse attribute rows).
inline NetworkPaths write_network(const AttributedNetwork& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  NetworkPaths paths{dir / "edges.txt", dir / "attributes.txt", {}};

  std::string edges;
  if (net.directed) edges += "%directed\n";
  for (const auto& t : net.adjacency.entries()) {
    if (!net.directed && t.col < t.row) continue;
    edges += net.node_names[t.row] + ' ' + net.node_names[t.col];
    if (t.value != 1.0) edges += ' ' + io::format_double(t.value);
    edges += '\n';
  }
  io::write_text(paths.edges, edges);

  std::string attrs = "%dim " + std::to_string(net.n_attributes()) + '\n';
  for (std::size_t i = 0; i < net.n_nodes(); ++i) {
    attrs += net.node_names[i];
    auto r = net.attributes.row(i);
    for (std::size_t d = 0; d < r.size(); ++d)
      if (r[d] != 0.0) attrs += ' ' + std::to_string(d) + ':' + io::format_double(r[d]);
    attrs += '\n';
  }
  io::write_text(paths.attributes, attrs);

  if (net.labels) {
    paths.labels = dir / "labels.txt";
    std::string labels;
    for (std::size_t i = 0; i < net.n_nodes(); ++i)
      labels += net.node_names[i] + ' ' + net.class_names[(*net.labels)[i]] + '\n';
    io::write_text(paths.labels, labels);
  }
  return paths;
}

/// Fraction of nodes in each class.
inline std::vector<double> class_distribution(const AttributedNetwork& net) {
  if (!net.labels) throw StateError("class_distribution: network has no labels");
  std::vector<double> p(net.n_classes(), 0.0);
  for (std::size_t c : *net.labels) p[c] += 1.0;
  const double n = static_cast<double>(net.labels->size());
  for (double& v : p) v /= n;
  return p;
}

// ---------------------------------------------------------------------------
// Results

struct EmbeddingResult {
  std::vector<std::string> node_names;
  DenseMatrix embedding;           ///< N x K
  std::vector<double> o1, o2, o3;  ///< per-view outlier scores
  std::vector<double> combined;    ///< weighted average of o1, o2, o3
  double initial_loss = 0.0;       ///< joint loss before the first round
  std::vector<double> loss_trace;  ///< joint loss after each round
};

struct ResultPaths {
  std::filesystem::path embedding;
  std::filesystem::path scores;
  std::filesystem::path loss;
};

inline ResultPaths result_paths(const std::filesystem::path& dir) {
  return {dir / "embedding.tsv", dir / "scores.tsv", dir / "loss.tsv"};
}

/// Writes embedding.tsv, scores.tsv and loss.tsv (loss row 0 is the initial loss).
inline ResultPaths save_result(const EmbeddingResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const ResultPaths paths = result_paths(dir);
  const std::size_t n = r.embedding.rows(), k = r.embedding.cols();
  if (r.node_names.size() != n || r.o1.size() != n || r.o2.size() != n || r.o3.size() != n ||
      r.combined.size() != n)
    throw DimensionError("save_result: per-node vectors disagree with embedding rows");

  std::string emb = "node_id";
  for (std::size_t c = 0; c < k; ++c) emb += "\tdim_" + std::to_string(c);
  emb += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    emb += r.node_names[i];
    for (double v : r.embedding.row(i)) emb += '\t' + io::format_double(v);
    emb += '\n';
  }
  io::write_text(paths.embedding, emb);

  std::string scores = "node_id\to1\to2\to3\tcombined\n";
  for (std::size_t i = 0; i < n; ++i)
    scores += r.node_names[i] + '\t' + io::format_double(r.o1[i]) + '\t' + io::format_double(r.o2[i]) + '\t' +
              io::format_double(r.o3[i]) + '\t' + io::format_double(r.combined[i]) + '\n';
  io::write_text(paths.scores, scores);

  std::string loss = "iteration\tloss\n0\t" + io::format_double(r.initial_loss) + '\n';
  for (std::size_t t = 0; t < r.loss_trace.size(); ++t)
    loss += std::to_string(t + 1) + '\t' + io::format_double(r.loss_trace[t]) + '\n';
  io::write_text(paths.loss, loss);
  return paths;
}

namespace detail {

// Header-checked TSV table: returns data rows split on tabs.
inline std::vector<std::vector<std::string_view>> read_tsv(const std::vector<std::string>& lines,
                                                           const std::string& file,
                                                           std::string_view expected_first_column,
                                                           std::size_t min_columns) {
  if (lines.empty()) throw ParseError(file, 1, "missing header row");
  auto header = io::split_char(lines[0], '\t');
  if (header.empty() || header[0] != expected_first_column)
    throw ParseError(file, 1, "unexpected header");
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty()) continue;
    auto cells = io::split_char(lines[ln], '\t');
    if (cells.size() != header.size() || cells.size() < min_columns)
      throw ParseError(file, ln + 1, "expected " + std::to_string(header.size()) + " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double cell_double(std::string_view s, const std::string& file, std::size_t line) {
  auto v = io::parse_double(s);
  if (!v) throw ParseError(file, line, "bad number '" + std::string(s) + "'");
  return *v;
}

}  // namespace detail

struct ScoreTable {
  std::vector<std::string> node_names;
  std::vector<double> o1, o2, o3, combined;
};

inline ScoreTable load_scores(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  const auto rows = detail::read_tsv(lines, path.string(), "node_id", 5);
  ScoreTable t;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& c = rows[r];
    t.node_names.emplace_back(c[0]);
    t.o1.push_back(detail::cell_double(c[1], path.string(), r + 2));
    t.o2.push_back(detail::cell_double(c[2], path.string(), r + 2));
    t.o3.push_back(detail::cell_double(c[3], path.string(), r + 2));
    t.combined.push_back(detail::cell_double(c[4], path.string(), r + 2));
  }
  return t;
}

/// Reads embedding.tsv as (node names, N x K matrix).
inline std::pair<std::vector<std::string>, DenseMatrix> load_embedding(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  const auto rows = detail::read_tsv(lines, path.string(), "node_id", 1);
  const std::size_t k = rows.empty() ? io::split_char(lines[0], '\t').size() - 1 : rows[0].size() - 1;
  std::vector<std::string> names;
  DenseMatrix m(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    names.emplace_back(rows[r][0]);
    for (std::size_t c = 0; c < k; ++c) m(r, c) = detail::cell_double(rows[r][c + 1], path.string(), r + 2);
  }
  return {std::move(names), std::move(m)};
}

/// Inverse of save_result.
inline EmbeddingResult load_result(const std::filesystem::path& dir) {
  const ResultPaths paths = result_paths(dir);
  EmbeddingResult r;
  std::tie(r.node_names, r.embedding) = load_embedding(paths.embedding);
  ScoreTable s = load_scores(paths.scores);
  if (s.node_names != r.node_names)
    throw ConsistencyError("load_result: scores.tsv and embedding.tsv list different nodes");
  r.o1 = std::move(s.o1);
  r.o2 = std::move(s.o2);
  r.o3 = std::move(s.o3);
  r.combined = std::move(s.combined);

  const auto lines = io::read_lines(paths.loss);
  const auto rows = detail::read_tsv(lines, paths.loss.string(), "iteration", 2);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const double v = detail::cell_double(rows[t][1], paths.loss.string(), t + 2);
    if (t == 0) r.initial_loss = v;
    else r.loss_trace.push_back(v);
  }
  return r;
}

}  // namespace one

#endif  // ONE_NETWORK_HPP
