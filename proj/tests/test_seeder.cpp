#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "one/seeder.hpp"
#include "test_support.hpp"

namespace {

using one::OutlierType;

one::AttributedNetwork synth(std::uint64_t seed, std::size_t classes = 3, double p_out = 0.005,
                             double signal = 0.9) {
  one::SynthParams p;
  p.n_classes = classes;
  p.p_out = p_out;
  p.attr_signal = signal;
  p.seed = seed;
  return one::synth_network(p);
}

// Block owner of attribute index a under the contiguous layout.
std::size_t block_of(std::size_t a, std::size_t d, std::size_t classes) {
  std::size_t c = 0;
  while (c + 1 < classes && a >= (c + 1) * d / classes) ++c;
  return c;
}

TEST(Synth, BlockStructure) {
  const auto net = synth(1);
  ASSERT_EQ(net.n_nodes(), 300u);
  ASSERT_EQ(net.n_classes(), 3u);
  const auto& y = *net.labels;
  double within = 0.0, cross = 0.0;
  for (const auto& t : net.adjacency.entries()) (y[t.row] == y[t.col] ? within : cross) += 1.0;
  EXPECT_GT(within / 300.0, cross / 300.0);
  EXPECT_TRUE(net.adjacency.is_symmetric());

  const auto disjoint = synth(2, 3, 0.0);
  for (const auto& t : disjoint.adjacency.entries()) EXPECT_EQ((*disjoint.labels)[t.row], (*disjoint.labels)[t.col]);

  const auto pure = synth(3, 3, 0.005, 1.0);
  for (std::size_t i = 0; i < pure.n_nodes(); ++i) {
    auto row = pure.attributes.row(i);
    std::size_t nnz = 0;
    for (std::size_t a = 0; a < row.size(); ++a)
      if (row[a] != 0.0) {
        ++nnz;
        EXPECT_EQ(block_of(a, pure.n_attributes(), 3), (*pure.labels)[i]);
      }
    EXPECT_GE(nnz, 1u);
  }
}

TEST(Synth, DomainErrors) {
  one::SynthParams p;
  p.p_out = p.p_in;
  EXPECT_THROW(one::synth_network(p), one::DomainError);
  p = {};
  p.attr_signal = 0.0;
  EXPECT_THROW(one::synth_network(p), one::DomainError);
  p = {};
  p.n_nodes = 2;
  EXPECT_THROW(one::synth_network(p), one::DomainError);
}

TEST(SeedingPlan, CountsAndValidation) {
  one::SeedingPlan plan;
  EXPECT_EQ(plan.counts(300), (std::array<std::size_t, 3>{5, 5, 5}));
  EXPECT_EQ(plan.counts(301), (std::array<std::size_t, 3>{6, 5, 5}));
  EXPECT_EQ(plan.counts(340), (std::array<std::size_t, 3>{6, 6, 5}));
  plan.total_fraction = 0.0;
  EXPECT_EQ(plan.counts(300), (std::array<std::size_t, 3>{0, 0, 0}));
  plan.total_fraction = 0.5;
  EXPECT_THROW(plan.validate(), one::DomainError);
  plan = {};
  plan.degree_band = 0.0;
  EXPECT_THROW(plan.validate(), one::DomainError);
}

// Two-class toy with a known mean degree: a 12-node ring in each class.
one::AttributedNetwork two_class_toy() {
  one::AttributedNetwork net;
  const std::size_t n = 24;
  std::vector<one::Triplet> t;
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i / 12;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t r = 0; r < 12; ++r)
      for (std::size_t hop = 1; hop <= 5; ++hop) {
        const std::size_t i = c * 12 + r, j = c * 12 + (r + hop) % 12;
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
  net.adjacency = one::SparseMatrix::from_triplets(n, n, std::move(t));  // degree 10
  net.attributes = one::DenseMatrix(n, 10);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < 3; ++a) net.attributes(i, y[i] * 5 + (i + a) % 5) = 1.0;
  net.labels = y;
  net.class_names = {"0", "1"};
  for (std::size_t i = 0; i < n; ++i) net.node_names.push_back(std::to_string(i));
  return net;
}

TEST(Plant, StructuralOnToy) {
  const auto net = two_class_toy();
  const auto& y = *net.labels;
  one::Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto node = one::plant_structural(net, {}, rng);
    EXPECT_EQ(node.type, OutlierType::Structural);
    EXPECT_GE(node.neighbors.size(), 9u);
    EXPECT_LE(node.neighbors.size(), 11u);
    for (std::size_t j : node.neighbors) EXPECT_NE(y[j], node.selected_class);
    for (auto [a, v] : node.attributes) {
      EXPECT_EQ(a / 5, node.selected_class);
      EXPECT_EQ(v, 1.0);
    }
    EXPECT_EQ(node.attributes.size(), 3u);
  }
}

TEST(Plant, AttributeAndCombinedOnToy) {
  const auto net = two_class_toy();
  const auto& y = *net.labels;
  one::Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const auto a = one::plant_attribute(net, {}, rng);
    for (std::size_t j : a.neighbors) EXPECT_EQ(y[j], a.selected_class);
    for (auto [idx, v] : a.attributes) EXPECT_NE(idx / 5, a.selected_class);
    EXPECT_GE(a.neighbors.size(), 9u);
    EXPECT_LE(a.neighbors.size(), 11u);

    const auto c = one::plant_combined(net, {}, rng);
    EXPECT_NE(c.attribute_class, c.selected_class);
    EXPECT_NE(c.attribute_class, one::kNoClass);
    for (std::size_t j : c.neighbors) EXPECT_EQ(y[j], c.selected_class);
    for (auto [idx, v] : c.attributes) EXPECT_EQ(idx / 5, c.attribute_class);
  }
}

TEST(Plant, StructuralKeywordsFollowSourceFrequency) {
  const auto net = synth(7);
  one::Rng rng(8);
  double own = 0.0, total = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto node = one::plant_structural(net, {}, rng);
    for (auto [a, v] : node.attributes) {
      own += block_of(a, net.n_attributes(), 3) == node.selected_class;
      total += 1.0;
    }
  }
  // Sampling without replacement flattens the distribution slightly; stay near attr_signal.
  EXPECT_GE(own / total, 0.8);
}

TEST(Plant, SingleClassIsRejected) {
  auto net = two_class_toy();
  net.labels = std::vector<std::size_t>(24, 0);
  one::Rng rng(1);
  EXPECT_THROW(one::plant_structural(net, {}, rng), one::DomainError);
  net.labels.reset();
  EXPECT_THROW(one::plant_attribute(net, {}, rng), one::StateError);
}

TEST(SeedOutliers, ContractOverManySeeds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = synth(100 + seed);
    one::SeedingPlan plan;
    plan.seed = seed;
    const auto ds = one::seed_outliers(net, plan);
    const auto ids = ds.all_outliers();
    ASSERT_EQ(ids.size(), 15u);
    for (const auto& per : ds.outlier_ids) EXPECT_EQ(per.size(), 5u);
    EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
    EXPECT_EQ(ds.network.n_nodes(), 315u);
    EXPECT_TRUE(ds.network.adjacency.is_symmetric());

    const auto profile = one::ClassProfile::build(net);
    const auto& y = *ds.network.labels;
    for (std::size_t p = 0; p < ds.provenance.size(); ++p) {
      const auto& node = ds.provenance[p];
      const std::size_t id = net.n_nodes() + p;
      EXPECT_EQ(y[id], node.selected_class);
      const double m = profile.mean_degree[node.selected_class];
      const std::size_t deg = ds.network.degree(id);
      EXPECT_EQ(deg, node.neighbors.size());
      EXPECT_GE(static_cast<double>(deg), std::max(1.0, std::ceil(0.9 * m - 1e-9)));
      EXPECT_LE(static_cast<double>(deg), std::floor(1.1 * m + 1e-9));
      for (std::size_t j : ds.network.adjacency.row_cols(id)) {
        if (node.type == OutlierType::Structural) EXPECT_NE(y[j], node.selected_class);
        else EXPECT_EQ(y[j], node.selected_class);
      }
    }
  }
}

TEST(SeedOutliers, ZeroFractionAndDeterminism) {
  const auto net = synth(9);
  one::SeedingPlan plan;
  plan.total_fraction = 0.0;
  const auto empty = one::seed_outliers(net, plan);
  EXPECT_TRUE(empty.all_outliers().empty());
  EXPECT_EQ(empty.network.adjacency.to_dense(), net.adjacency.to_dense());
  EXPECT_EQ(empty.network.attributes, net.attributes);

  plan.total_fraction = 0.05;
  plan.seed = 4;
  const auto a = one::seed_outliers(net, plan);
  const auto b = one::seed_outliers(net, plan);
  EXPECT_EQ(a.network.adjacency.entries().size(), b.network.adjacency.entries().size());
  EXPECT_EQ(a.network.adjacency.to_dense(), b.network.adjacency.to_dense());
  EXPECT_EQ(a.network.attributes, b.network.attributes);
  EXPECT_EQ(a.outlier_ids, b.outlier_ids);
}

TEST(SeedOutliers, PlantedNodesLookOrdinary) {
  const auto net = synth(11);
  one::SeedingPlan plan;
  plan.seed = 11;
  plan.total_fraction = 0.2;
  const auto ds = one::seed_outliers(net, plan);
  double deg_normal = 0.0, deg_out = 0.0, nnz_normal = 0.0, nnz_out = 0.0;
  const std::size_t n0 = net.n_nodes(), n = ds.network.n_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    double nnz = 0.0;
    for (double v : ds.network.attributes.row(i)) nnz += v != 0.0;
    (i < n0 ? deg_normal : deg_out) += static_cast<double>(ds.network.degree(i));
    (i < n0 ? nnz_normal : nnz_out) += nnz;
  }
  // Mean degree of the originals includes the edges added towards planted nodes.
  deg_normal /= static_cast<double>(n0);
  nnz_normal /= static_cast<double>(n0);
  deg_out /= static_cast<double>(n - n0);
  nnz_out /= static_cast<double>(n - n0);
  EXPECT_LT(std::abs(deg_out - deg_normal) / deg_normal, 0.2);
  EXPECT_LT(std::abs(nnz_out - nnz_normal) / nnz_normal, 0.2);
}

TEST(Truth, WriteAndLoad) {
  const auto net = synth(12);
  one::SeedingPlan plan;
  plan.seed = 1;
  const auto ds = one::seed_outliers(net, plan);
  const auto path = testing_support::temp_dir("truth") / "truth.tsv";
  one::write_truth(ds, path);
  const auto truth = one::load_truth(path);
  ASSERT_EQ(truth.size(), 15u);
  for (const auto& e : truth) {
    const std::size_t id = std::stoul(e.node_name);
    const auto& per = ds.outlier_ids[static_cast<std::size_t>(e.type)];
    EXPECT_NE(std::find(per.begin(), per.end(), id), per.end());
  }
  one::io::write_text(path, "node_id\ttype\n3\tweird\n");
  EXPECT_THROW(one::load_truth(path), one::ParseError);
}

TEST(AppendNodes, StringNamesGetFreshIds) {
  auto net = two_class_toy();
  for (std::size_t i = 0; i < net.n_nodes(); ++i) net.node_names[i] = "v" + std::to_string(i);
  one::SeedingPlan plan;
  plan.total_fraction = 0.1;
  const auto ds = one::seed_outliers(net, plan);
  EXPECT_EQ(ds.network.node_names[24], "outlier_0");
  EXPECT_EQ(ds.network.node_names.size(), 27u);
}

}  // namespace
