#include <gtest/gtest.h>

#include <sstream>

#include "one/cli.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "one");
  std::ostringstream out, err;
  const int code = one::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::string s;
  for (const auto& l : one::io::read_lines(p)) s += l + '\n';
  return s;
}

// A seeded synthetic dataset under dir/data.
fs::path seeded(const fs::path& dir, const std::string& seed = "3", const std::string& classes = "3") {
  const auto r = run({"--seed", seed, "seed", "--synthetic", "--classes", classes, "--out", (dir / "data").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return dir / "data";
}

TEST(Cli, VersionAndHelp) {
  auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, std::string(one::kVersion) + "\n");
  r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"seed", "embed", "rank-outliers", "evaluate"}) EXPECT_NE(r.out.find(sub), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"embed", "--bogus"}).code, 2);
}

TEST(Cli, SeedSyntheticPlantsFivePercent) {
  const auto dir = testing_support::temp_dir("cli_seed");
  const auto r = run({"seed", "--synthetic", "--fraction", "0.05", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dataset\tnodes\tedges\tlabels\tattributes"), std::string::npos);
  EXPECT_NE(r.out.find("seeded\t315\t"), std::string::npos);
  EXPECT_NE(r.out.find("5 structural, 5 attribute, 5 combined"), std::string::npos);
  EXPECT_EQ(one::load_truth(dir / "truth.tsv").size(), 15u);
  for (const char* f : {"edges.txt", "attributes.txt", "labels.txt"}) EXPECT_TRUE(fs::exists(dir / f));
}

TEST(Cli, SeedZeroFractionCopiesInput) {
  const auto src = seeded(testing_support::temp_dir("cli_zero_src"));
  const auto dir = testing_support::temp_dir("cli_zero");
  const auto r = run({"seed", "--edges", (src / "edges.txt").string(), "--attributes", (src / "attributes.txt").string(),
                      "--labels", (src / "labels.txt").string(), "--fraction", "0", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(one::load_truth(dir / "truth.tsv").empty());
  EXPECT_EQ(slurp(dir / "edges.txt"), slurp(src / "edges.txt"));
  EXPECT_EQ(slurp(dir / "attributes.txt"), slurp(src / "attributes.txt"));
}

TEST(Cli, SeedErrors) {
  const auto dir = testing_support::temp_dir("cli_seed_err");
  EXPECT_EQ(run({"seed", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"seed", "--synthetic", "--fraction", "0.7", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"seed", "--synthetic", "--fraction", "abc", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"seed", "--edges", "/nonexistent/e", "--attributes", "/nonexistent/a", "--labels", "/nonexistent/l",
                 "--out", dir.string()})
                .code,
            1);
}

TEST(Cli, EmbedDefaultsAndOutputs) {
  const auto dir = testing_support::temp_dir("cli_embed");
  const auto data = seeded(dir, "1", "6");
  const auto r = run({"embed", "--edges", (data / "edges.txt").string(), "--attributes",
                      (data / "attributes.txt").string(), "--labels", (data / "labels.txt").string(), "--nmf-sweeps",
                      "20", "--out", (dir / "res").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("k\t18\n"), std::string::npos);  // 3 x 6 labels

  const auto res = one::load_result(dir / "res");
  EXPECT_EQ(res.embedding.cols(), 18u);
  ASSERT_EQ(res.loss_trace.size(), 5u);
  double prev = res.initial_loss;
  for (double l : res.loss_trace) {
    EXPECT_LE(l, prev + 1e-9 * prev);
    prev = l;
  }
}

TEST(Cli, EmbedErrors) {
  const auto dir = testing_support::temp_dir("cli_embed_err");
  const auto data = seeded(dir);
  const std::string edges = (data / "edges.txt").string(), attrs = (data / "attributes.txt").string();
  auto r = run({"embed", "--edges", edges, "--attributes", "/nonexistent/attrs.txt", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/nonexistent/attrs.txt"), std::string::npos);
  EXPECT_EQ(run({"embed", "--edges", edges, "--attributes", attrs, "--out", dir.string()}).code, 2);  // no k
  EXPECT_EQ(run({"embed", "--edges", edges, "--attributes", attrs, "--k", "0", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"embed", "--edges", edges, "--attributes", attrs, "--k", "4", "--mu", "-1", "--out", dir.string()}).code,
            2);
  EXPECT_EQ(
      run({"embed", "--edges", edges, "--attributes", attrs, "--k", "4", "--weights", "1,1", "--out", dir.string()}).code,
      2);
}

TEST(Cli, EmbedNumericFailureExitsThree) {
  const auto dir = testing_support::temp_dir("cli_numeric");
  one::io::write_text(dir / "e.txt", "0 1\n1 2\n");
  one::io::write_text(dir / "a.txt", "0 1e300 1e300\n1 1e300 1e300\n2 1e300 1e300\n");
  const auto r = run({"embed", "--edges", (dir / "e.txt").string(), "--attributes", (dir / "a.txt").string(), "--k",
                      "1", "--out", (dir / "res").string()});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("numeric"), std::string::npos);
}

one::EmbeddingResult three_node_result() {
  one::EmbeddingResult r;
  r.node_names = {"a", "b", "c"};
  r.embedding = one::DenseMatrix{{1.0}, {2.0}, {3.0}};
  r.o1 = {0.8, 0.1, 0.1};
  r.o2 = {0.3, 0.2, 0.5};
  r.o3 = {0.1, 0.8, 0.1};
  r.combined = one::final_outlier_score(one::OutlierScores{r.o1, r.o2, r.o3}, one::HyperParams{}.combine_weights);
  r.loss_trace = {1.0};
  return r;
}

std::vector<std::string> ranked_names(const fs::path& p) {
  std::vector<std::string> names;
  const auto lines = one::io::read_lines(p);
  for (std::size_t i = 1; i < lines.size(); ++i) names.emplace_back(one::io::split_char(lines[i], '\t')[1]);
  return names;
}

TEST(Cli, RankOutliers) {
  const auto dir = testing_support::temp_dir("cli_rank");
  one::save_result(three_node_result(), dir);
  const std::string scores = (dir / "scores.tsv").string();
  ASSERT_EQ(run({"rank-outliers", "--scores", scores, "--out", dir.string()}).code, 0);
  // Combined column under 0.25/0.5/0.25: a 0.375, b 0.325, c 0.3.
  EXPECT_EQ(ranked_names(dir / "ranked.tsv"), (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(run({"rank-outliers", "--scores", scores, "--weights", "0,1,0", "--out", dir.string()}).code, 0);
  EXPECT_EQ(ranked_names(dir / "ranked.tsv"), (std::vector<std::string>{"c", "a", "b"}));
  ASSERT_EQ(run({"rank-outliers", "--scores", scores, "--weights", "0,0,1", "--out", dir.string()}).code, 0);
  EXPECT_EQ(ranked_names(dir / "ranked.tsv"), (std::vector<std::string>{"b", "a", "c"}));
  // Recombined scores are written too: a = 0.5 * 0.8 + 0.5 * 0.3.
  ASSERT_EQ(run({"rank-outliers", "--scores", scores, "--weights", "0.5,0.5,0", "--out", dir.string()}).code, 0);
  EXPECT_NE(slurp(dir / "ranked.tsv").find("1\ta\t0.55\n"), std::string::npos);

  EXPECT_EQ(run({"rank-outliers", "--scores", scores, "--weights", "x,1,0", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"rank-outliers", "--scores", scores, "--weights", "0.5,0.6,0", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"rank-outliers", "--scores", "/nonexistent/s.tsv", "--out", dir.string()}).code, 1);
}

TEST(Cli, EvaluateOneHotOracle) {
  const auto dir = testing_support::temp_dir("cli_eval_oracle");
  const std::size_t n = 300;
  one::EmbeddingResult r;
  r.embedding = one::DenseMatrix(n, 3);
  std::string labels, truth = "node_id\ttype\n";
  for (std::size_t i = 0; i < n; ++i) {
    r.node_names.push_back("v" + std::to_string(i));
    r.embedding(i, i % 3) = 1.0;
    labels += "v" + std::to_string(i) + ' ' + std::to_string(i % 3) + '\n';
  }
  r.o1 = r.o2 = r.o3 = r.combined = std::vector<double>(n, 1.0 / n);
  truth += "v5\tstructural\n";
  one::save_result(r, dir / "res");
  one::io::write_text(dir / "labels.txt", labels);
  one::io::write_text(dir / "truth.tsv", truth);
  const auto run_eval = run({"evaluate", "--result", (dir / "res").string(), "--labels", (dir / "labels.txt").string(),
                             "--truth", (dir / "truth.tsv").string(), "--reps", "2", "--out", (dir / "rep").string()});
  ASSERT_EQ(run_eval.code, 0) << run_eval.err;
  const auto rep = one::EvalReport::from_json(nlohmann::json::parse(slurp(dir / "rep" / "report.json")));
  EXPECT_EQ(rep.clustering_accuracy, 1.0);
  EXPECT_EQ(rep.recall_at.size(), 5u);
  EXPECT_EQ(rep.f1.size(), 5u);
  EXPECT_TRUE(fs::exists(dir / "rep" / "report.tsv"));
}

TEST(Cli, EvaluateMisalignedInputs) {
  const auto dir = testing_support::temp_dir("cli_eval_bad");
  one::save_result(three_node_result(), dir / "res");
  one::io::write_text(dir / "labels.txt", "a 0\nb 1\nz 0\n");
  one::io::write_text(dir / "truth.tsv", "node_id\ttype\na\tstructural\n");
  auto args = [&](const std::string& labels, const std::string& truth) {
    return std::vector<std::string>{"evaluate", "--result", (dir / "res").string(), "--labels", labels, "--truth",
                                    truth, "--out", dir.string()};
  };
  EXPECT_EQ(run(args((dir / "labels.txt").string(), (dir / "truth.tsv").string())).code, 2);
  one::io::write_text(dir / "labels2.txt", "a 0\nb 1\nc 0\n");
  one::io::write_text(dir / "truth2.tsv", "node_id\ttype\nq\tstructural\n");
  EXPECT_EQ(run(args((dir / "labels2.txt").string(), (dir / "truth2.tsv").string())).code, 2);
  auto bad_splits = args((dir / "labels2.txt").string(), (dir / "truth.tsv").string());
  bad_splits.insert(bad_splits.end(), {"--splits", "50:10:10"});
  EXPECT_EQ(run(bad_splits).code, 2);
}

TEST(Cli, ConfigFileAndPrecedence) {
  const auto dir = testing_support::temp_dir("cli_config");
  const auto data = seeded(dir);
  one::io::write_text(dir / "run.cfg", "# experiment manifest\nk = 4\niters=2\n--nmf-sweeps=10\n");
  const std::vector<std::string> base{"--config", (dir / "run.cfg").string(), "embed", "--edges",
                                      (data / "edges.txt").string(), "--attributes",
                                      (data / "attributes.txt").string(), "--out", (dir / "res").string()};
  auto r = run(base);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("k\t4\n"), std::string::npos);
  EXPECT_EQ(one::load_result(dir / "res").loss_trace.size(), 2u);

  auto overridden = base;
  overridden.insert(overridden.end(), {"--iters", "3"});
  r = run(overridden);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(one::load_result(dir / "res").loss_trace.size(), 3u);

  one::io::write_text(dir / "bad.cfg", "no equals sign\n");
  EXPECT_EQ(run({"--config", (dir / "bad.cfg").string(), "embed", "--edges", "e", "--attributes", "a", "--out", "o"}).code,
            1);
  one::io::write_text(dir / "unknown.cfg", "colour=blue\n");
  EXPECT_EQ(
      run({"--config", (dir / "unknown.cfg").string(), "embed", "--edges", "e", "--attributes", "a", "--out", "o"}).code,
      2);
}

TEST(Cli, PipelineIsByteIdentical) {
  auto pipeline = [](const fs::path& dir) {
    const auto data = seeded(dir, "11");
    const std::string res = (dir / "res").string();
    EXPECT_EQ(run({"--seed", "11", "embed", "--edges", (data / "edges.txt").string(), "--attributes",
                   (data / "attributes.txt").string(), "--labels", (data / "labels.txt").string(), "--nmf-sweeps", "30",
                   "--out", res})
                  .code,
              0);
    EXPECT_EQ(run({"--seed", "11", "rank-outliers", "--scores", res + "/scores.tsv", "--out", res}).code, 0);
    EXPECT_EQ(run({"--seed", "11", "evaluate", "--result", res, "--labels", (data / "labels.txt").string(), "--truth",
                   (data / "truth.tsv").string(), "--reps", "2", "--out", res})
                  .code,
              0);
  };
  const auto a = testing_support::temp_dir("cli_det_a"), b = testing_support::temp_dir("cli_det_b");
  pipeline(a);
  pipeline(b);
  for (const char* f : {"data/edges.txt", "data/attributes.txt", "data/labels.txt", "data/truth.tsv", "res/embedding.tsv",
                        "res/scores.tsv", "res/loss.tsv", "res/ranked.tsv", "res/report.json", "res/report.tsv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

}  // namespace
