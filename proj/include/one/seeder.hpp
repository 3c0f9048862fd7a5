#ifndef ONE_SEEDER_HPP
#define ONE_SEEDER_HPP

// Planting of ground-truth outlier nodes into a labeled attributed network,
// plus a stochastic-block-model generator with class-owned keyword blocks.
//
// structural: attributes drawn from the selected class, every edge leaves it
// attribute : edges inside the selected class, attributes from the other classes
// combined  : edges inside class c1, attributes from a single other class c2
//
// Planted degrees are drawn from [ (1-band) m, (1+band) m ] where m is the mean
// degree of the selected class.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "one/errors.hpp"
#include "one/io_util.hpp"
#include "one/network.hpp"
#include "one/numerics.hpp"

namespace one {

enum class OutlierType : std::uint8_t { Structural = 0, Attribute = 1, Combined = 2 };

inline constexpr std::array<OutlierType, 3> kOutlierTypes{OutlierType::Structural, OutlierType::Attribute,
                                                          OutlierType::Combined};

inline const char* to_string(OutlierType t) {
  switch (t) {
    case OutlierType::Structural: return "structural";
    case OutlierType::Attribute: return "attribute";
    case OutlierType::Combined: return "combined";
  }
  return "?";
}

inline OutlierType outlier_type_from_string(std::string_view s) {
  for (auto t : kOutlierTypes)
    if (s == to_string(t)) return t;
  throw DomainError("unknown outlier type '" + std::string(s) + "'");
}

struct SeedingPlan {
  double total_fraction = 0.05;
  double degree_band = 0.10;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(total_fraction >= 0.0) || total_fraction >= 0.5)
      throw DomainError("seeding fraction must lie in [0, 0.5)");
    if (!(degree_band > 0.0) || degree_band >= 1.0) throw DomainError("degree band must lie in (0, 1)");
  }

  /// ceil(fraction * n) split evenly, remainder going structural -> attribute -> combined.
  std::array<std::size_t, 3> counts(std::size_t n) const {
    const auto total = static_cast<std::size_t>(std::ceil(total_fraction * static_cast<double>(n) - 1e-9));
    std::array<std::size_t, 3> c{total / 3, total / 3, total / 3};
    for (std::size_t r = 0; r < total % 3; ++r) ++c[r];
    return c;
  }
};

inline constexpr std::size_t kNoClass = static_cast<std::size_t>(-1);

struct PlantedNode {
  OutlierType type = OutlierType::Structural;
  std::vector<std::size_t> neighbors;                        ///< existing node indices
  std::vector<std::pair<std::size_t, double>> attributes;    ///< sorted (index, value)
  std::size_t label = 0;                                     ///< class assigned to the new node
  std::size_t selected_class = 0;                            ///< class the degree band comes from
  std::size_t attribute_class = kNoClass;                    ///< c2 for combined outliers
};

struct SeededDataset {
  AttributedNetwork network;
  std::array<std::vector<std::size_t>, 3> outlier_ids;  ///< indexed by OutlierType
  std::vector<PlantedNode> provenance;                  ///< in planting order

  std::vector<std::size_t> all_outliers() const {
    std::vector<std::size_t> all;
    for (const auto& ids : outlier_ids) all.insert(all.end(), ids.begin(), ids.end());
    std::sort(all.begin(), all.end());
    return all;
  }
};

// ---------------------------------------------------------------------------
// Synthetic networks

struct SynthParams {
  std::size_t n_nodes = 300;
  std::size_t n_classes = 3;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t n_attrs = 500;  // Pubmed: 3 classes, 500 attributes
  double attr_signal = 0.9;
  std::uint64_t seed = 0;
};

/// Stochastic block model over contiguous equal-size classes. Class c owns the
/// keyword block [c*D/C, (c+1)*D/C); each node takes about a fifth of a block's
/// size in binary keywords, each from its own block with probability attr_signal.
inline AttributedNetwork synth_network(const SynthParams& p) {
  if (p.n_classes < 1 || p.n_nodes < p.n_classes) throw DomainError("synth_network: need n_nodes >= n_classes >= 1");
  if (!(p.p_in >= 0.0 && p.p_in <= 1.0 && p.p_out >= 0.0 && p.p_out <= 1.0) || !(p.p_in > p.p_out))
    throw DomainError("synth_network: need 0 <= p_out < p_in <= 1");
  if (p.n_attrs < p.n_classes) throw DomainError("synth_network: need n_attrs >= n_classes");
  if (!(p.attr_signal > 0.0) || p.attr_signal > 1.0) throw DomainError("synth_network: attr_signal must lie in (0, 1]");

  Rng rng(p.seed);
  const std::size_t n = p.n_nodes, cls = p.n_classes, d = p.n_attrs;
  AttributedNetwork net;
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i * cls / n;
  for (std::size_t c = 0; c < cls; ++c) net.class_names.push_back(std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) net.node_names.push_back(std::to_string(i));

  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(labels[i] == labels[j] ? p.p_in : p.p_out)) {
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
  net.adjacency = SparseMatrix::from_triplets(n, n, std::move(t));

  auto block_begin = [&](std::size_t c) { return c * d / cls; };
  const std::size_t block = d / cls;
  const std::size_t lo = std::max<std::size_t>(1, block / 10);
  const std::size_t hi = std::max(lo, block / 4);
  net.attributes = DenseMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = labels[i];
    const std::size_t own_begin = block_begin(c), own_end = block_begin(c + 1);
    const std::size_t own_size = own_end - own_begin, other_size = d - own_size;
    const std::size_t want = lo + rng.uniform_index(hi - lo + 1);
    std::size_t placed = 0, guard = 0;
    while (placed < want && guard++ < 100 * want) {
      std::size_t idx;
      if (rng.bernoulli(p.attr_signal) || other_size == 0) {
        idx = own_begin + rng.uniform_index(own_size);
      } else {
        idx = rng.uniform_index(other_size);
        if (idx >= own_begin) idx += own_size;
      }
      if (net.attributes(i, idx) != 0.0) continue;
      net.attributes(i, idx) = 1.0;
      ++placed;
    }
  }
  net.labels = std::move(labels);
  return net;
}

// ---------------------------------------------------------------------------
// Class statistics

struct ClassProfile {
  std::vector<std::vector<std::size_t>> members;   ///< per class
  std::vector<double> mean_degree;                 ///< per class
  std::vector<std::vector<double>> keyword_freq;   ///< per class, per attribute: #members with it nonzero
  std::vector<std::vector<double>> keyword_sum;    ///< per class, per attribute: sum of nonzero values
  std::vector<std::size_t> nnz;                    ///< per node nonzero-attribute count
  std::vector<double> class_prob;
  bool binary = true;

  static ClassProfile build(const AttributedNetwork& net) {
    if (!net.labels) throw StateError("seeding requires a labeled network");
    ClassProfile p;
    const std::size_t cls = net.n_classes(), d = net.n_attributes();
    p.members.resize(cls);
    p.mean_degree.assign(cls, 0.0);
    p.keyword_freq.assign(cls, std::vector<double>(d, 0.0));
    p.keyword_sum.assign(cls, std::vector<double>(d, 0.0));
    p.nnz.assign(net.n_nodes(), 0);
    for (std::size_t i = 0; i < net.n_nodes(); ++i) {
      const std::size_t c = (*net.labels)[i];
      p.members[c].push_back(i);
      p.mean_degree[c] += static_cast<double>(net.degree(i));
      auto row = net.attributes.row(i);
      for (std::size_t a = 0; a < d; ++a) {
        if (row[a] == 0.0) continue;
        ++p.nnz[i];
        p.keyword_freq[c][a] += 1.0;
        p.keyword_sum[c][a] += row[a];
        if (row[a] != 1.0) p.binary = false;
      }
    }
    for (std::size_t c = 0; c < cls; ++c)
      if (!p.members[c].empty()) p.mean_degree[c] /= static_cast<double>(p.members[c].size());
    p.class_prob = class_distribution(net);
    return p;
  }
};

namespace detail {

inline std::size_t planted_degree(double m, double band, std::size_t available, Rng& rng) {
  if (available == 0) throw DomainError("seeding: selected class has no candidate neighbours");
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil((1.0 - band) * m - 1e-9)));
  const auto hi = static_cast<std::size_t>(std::max(0.0, std::floor((1.0 + band) * m + 1e-9)));
  std::size_t deg;
  if (lo <= hi) deg = lo + rng.uniform_index(hi - lo + 1);
  else deg = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m)));  // no integer inside the band
  return std::min(deg, available);
}

inline std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& pool, std::size_t count,
                                                           Rng& rng) {
  std::vector<std::size_t> v = pool;
  count = std::min(count, v.size());
  for (std::size_t i = 0; i < count; ++i) std::swap(v[i], v[i + rng.uniform_index(v.size() - i)]);
  v.resize(count);
  std::sort(v.begin(), v.end());
  return v;
}

// Attributes for a planted node: nonzero count copied from a random source node,
// indices drawn by keyword frequency without replacement, values 1 (binary data)
// or the mean nonzero value of the keyword over the source classes.
inline std::vector<std::pair<std::size_t, double>> sample_keywords(const ClassProfile& p,
                                                                   const std::vector<std::size_t>& source_classes,
                                                                   Rng& rng) {
  std::vector<std::size_t> sources;
  for (std::size_t c : source_classes) sources.insert(sources.end(), p.members[c].begin(), p.members[c].end());
  if (sources.empty()) throw DomainError("seeding: no nodes to sample keywords from");
  const std::size_t count = p.nnz[sources[rng.uniform_index(sources.size())]];
  const std::size_t d = p.keyword_freq.empty() ? 0 : p.keyword_freq[0].size();
  std::vector<double> freq(d, 0.0), sum(d, 0.0);
  for (std::size_t c : source_classes)
    for (std::size_t a = 0; a < d; ++a) {
      freq[a] += p.keyword_freq[c][a];
      sum[a] += p.keyword_sum[c][a];
    }
  std::vector<std::pair<std::size_t, double>> out;
  double remaining = 0.0;
  for (double f : freq) remaining += f;
  for (std::size_t s = 0; s < count && remaining > 0.0; ++s) {
    const std::size_t a = rng.weighted_index(freq);
    out.emplace_back(a, p.binary ? 1.0 : sum[a] / freq[a]);
    remaining -= freq[a];
    freq[a] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t select_class(const ClassProfile& p, Rng& rng, std::size_t exclude = kNoClass) {
  std::vector<double> w = p.class_prob;
  if (exclude != kNoClass) w[exclude] = 0.0;
  return rng.weighted_index(w);
}

inline void require_classes(const ClassProfile& p) {
  std::size_t nonempty = 0;
  for (const auto& m : p.members) nonempty += !m.empty();
  if (nonempty < 2) throw DomainError("seeding needs at least two non-empty classes");
}

inline std::vector<std::size_t> others(std::size_t n_classes, std::size_t c) {
  std::vector<std::size_t> o;
  for (std::size_t x = 0; x < n_classes; ++x)
    if (x != c) o.push_back(x);
  return o;
}

inline PlantedNode plant_structural(const ClassProfile& p, const SeedingPlan& plan, Rng& rng) {
  require_classes(p);
  PlantedNode node{OutlierType::Structural, {}, {}, 0, 0, kNoClass};
  const std::size_t c = select_class(p, rng);
  std::vector<std::size_t> outside;
  for (std::size_t x : others(p.members.size(), c)) outside.insert(outside.end(), p.members[x].begin(), p.members[x].end());
  std::sort(outside.begin(), outside.end());
  if (outside.empty()) throw DomainError("seeding: class has no external nodes");
  const std::size_t deg = planted_degree(p.mean_degree[c], plan.degree_band, outside.size(), rng);
  node.neighbors = sample_without_replacement(outside, deg, rng);
  node.attributes = sample_keywords(p, {c}, rng);
  node.label = node.selected_class = c;
  return node;
}

inline PlantedNode plant_attribute(const ClassProfile& p, const SeedingPlan& plan, Rng& rng) {
  require_classes(p);
  PlantedNode node{OutlierType::Attribute, {}, {}, 0, 0, kNoClass};
  const std::size_t c = select_class(p, rng);
  const std::size_t deg = planted_degree(p.mean_degree[c], plan.degree_band, p.members[c].size(), rng);
  node.neighbors = sample_without_replacement(p.members[c], deg, rng);
  node.attributes = sample_keywords(p, others(p.members.size(), c), rng);
  node.label = node.selected_class = c;
  return node;
}

inline PlantedNode plant_combined(const ClassProfile& p, const SeedingPlan& plan, Rng& rng) {
  require_classes(p);
  PlantedNode node{OutlierType::Combined, {}, {}, 0, 0, kNoClass};
  const std::size_t c1 = select_class(p, rng);
  const std::size_t c2 = select_class(p, rng, c1);
  const std::size_t deg = planted_degree(p.mean_degree[c1], plan.degree_band, p.members[c1].size(), rng);
  node.neighbors = sample_without_replacement(p.members[c1], deg, rng);
  node.attributes = sample_keywords(p, {c2}, rng);
  node.label = node.selected_class = c1;
  node.attribute_class = c2;
  return node;
}

}  // namespace detail

inline PlantedNode plant_structural(const AttributedNetwork& net, const SeedingPlan& plan, Rng& rng) {
  return detail::plant_structural(ClassProfile::build(net), plan, rng);
}
inline PlantedNode plant_attribute(const AttributedNetwork& net, const SeedingPlan& plan, Rng& rng) {
  return detail::plant_attribute(ClassProfile::build(net), plan, rng);
}
inline PlantedNode plant_combined(const AttributedNetwork& net, const SeedingPlan& plan, Rng& rng) {
  return detail::plant_combined(ClassProfile::build(net), plan, rng);
}

/// Appends planted nodes to a copy of the network (new indices N, N+1, ...).
inline AttributedNetwork append_nodes(const AttributedNetwork& net, const std::vector<PlantedNode>& planted) {
  const std::size_t n0 = net.n_nodes(), n = n0 + planted.size();
  AttributedNetwork out;
  out.directed = net.directed;
  out.class_names = net.class_names;
  out.metadata = net.metadata;

  std::vector<Triplet> t = net.adjacency.entries();
  for (std::size_t p = 0; p < planted.size(); ++p)
    for (std::size_t j : planted[p].neighbors) {
      t.push_back({n0 + p, j, 1.0});
      t.push_back({j, n0 + p, 1.0});
    }
  out.adjacency = SparseMatrix::from_triplets(n, n, std::move(t));

  out.attributes = DenseMatrix(n, net.n_attributes());
  std::copy(net.attributes.data().begin(), net.attributes.data().end(), out.attributes.data().begin());
  for (std::size_t p = 0; p < planted.size(); ++p)
    for (auto [a, v] : planted[p].attributes) out.attributes(n0 + p, a) = v;

  std::vector<std::size_t> labels = net.labels.value_or(std::vector<std::size_t>(n0, 0));
  for (const auto& p : planted) labels.push_back(p.label);
  out.labels = std::move(labels);

  // Keep integer naming when the source used it, otherwise prefix fresh names.
  bool integer_names = true;
  for (std::size_t i = 0; i < n0 && integer_names; ++i) integer_names = net.node_names[i] == std::to_string(i);
  std::unordered_set<std::string> used(net.node_names.begin(), net.node_names.end());
  out.node_names = net.node_names;
  for (std::size_t p = 0; p < planted.size(); ++p) {
    std::string name = integer_names ? std::to_string(n0 + p) : "outlier_" + std::to_string(p);
    while (used.count(name)) name += "_";
    used.insert(name);
    out.node_names.push_back(std::move(name));
  }
  return out;
}

/// Plants ceil(fraction * N) outliers into a labeled network. Deterministic in plan.seed.
inline SeededDataset seed_outliers(const AttributedNetwork& net, const SeedingPlan& plan) {
  plan.validate();
  const ClassProfile profile = ClassProfile::build(net);
  const auto counts = plan.counts(net.n_nodes());
  Rng rng(Rng::derive_seed(plan.seed, "seeding"));

  SeededDataset ds;
  for (auto type : kOutlierTypes) {
    for (std::size_t r = 0; r < counts[static_cast<std::size_t>(type)]; ++r) {
      PlantedNode node;
      switch (type) {
        case OutlierType::Structural: node = detail::plant_structural(profile, plan, rng); break;
        case OutlierType::Attribute: node = detail::plant_attribute(profile, plan, rng); break;
        case OutlierType::Combined: node = detail::plant_combined(profile, plan, rng); break;
      }
      ds.outlier_ids[static_cast<std::size_t>(type)].push_back(net.n_nodes() + ds.provenance.size());
      ds.provenance.push_back(std::move(node));
    }
  }
  ds.network = ds.provenance.empty() ? net : append_nodes(net, ds.provenance);
  return ds;
}

// ---------------------------------------------------------------------------
// Ground-truth file: header "node_id<TAB>type", one planted node per row.

inline void write_truth(const SeededDataset& ds, const std::filesystem::path& path) {
  std::vector<std::pair<std::size_t, OutlierType>> rows;
  for (auto type : kOutlierTypes)
    for (std::size_t id : ds.outlier_ids[static_cast<std::size_t>(type)]) rows.emplace_back(id, type);
  std::sort(rows.begin(), rows.end());
  std::string text = "node_id\ttype\n";
  for (auto [id, type] : rows) text += ds.network.node_names[id] + '\t' + to_string(type) + '\n';
  io::write_text(path, text);
}

struct TruthEntry {
  std::string node_name;
  OutlierType type;
};

inline std::vector<TruthEntry> load_truth(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  std::vector<TruthEntry> out;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = io::split_ws(lines[ln]);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (ln == 0 && toks.size() == 2 && toks[0] == "node_id" && toks[1] == "type") continue;
    if (toks.size() != 2) throw ParseError(path.string(), ln + 1, "expected '<node_id> <type>'");
    try {
      out.push_back({std::string(toks[0]), outlier_type_from_string(toks[1])});
    } catch (const DomainError& e) {
      throw ParseError(path.string(), ln + 1, e.what());
    }
  }
  return out;
}

}  // namespace one

#endif  // ONE_SEEDER_HPP
