#ifndef ONE_CLI_HPP
#define ONE_CLI_HPP

// Command-line driver: seed, embed, rank-outliers, evaluate.
//
// Exit codes: 0 success, 1 I/O or parse failure, 2 bad configuration, 3 numeric failure.
// A --config file holds key=value lines naming long flags without dashes;
// flags given on the command line win.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "one/core.hpp"
#include "one/errors.hpp"
#include "one/evaluation.hpp"
#include "one/io_util.hpp"
#include "one/network.hpp"
#include "one/seeder.hpp"
#include "one/version.hpp"

namespace one {

namespace cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kNumericError = 3 };

/// Raised for inconsistent flag combinations or misaligned inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config;
};

struct SeedOptions {
  std::string edges, attributes, labels, out;
  bool synthetic = false;
  SynthParams synth;
  SeedingPlan plan;
};

struct EmbedOptions {
  std::string edges, attributes, labels, out;
  std::optional<std::size_t> k;
  std::optional<double> alpha, beta, early_stop;
  double mu = 1.0;
  std::size_t iters = 5;
  double eps_o = 1e-8;
  std::string weights;
  std::size_t nmf_sweeps = kDefaultNmfSweeps;
};

struct RankOptions {
  std::string scores, weights, out;
};

struct EvaluateOptions {
  std::string labels, truth, result, out, splits = "10:50:10", levels = "5:25:5";
  std::size_t reps = 10;
  bool exclude_outliers = false;
};

// key=value lines, '#' comments. Keys may be written with or without leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto t = io::trim(lines[ln]);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(path.string(), ln + 1, "expected key=value");
    auto key = std::string(io::trim(t.substr(0, eq)));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty()) throw ParseError(path.string(), ln + 1, "empty key");
    out.emplace_back(key, std::string(io::trim(t.substr(eq + 1))));
  }
  return out;
}

/// Parses "a,b,c" into three combine weights.
inline std::array<double, 3> parse_weights(const std::string& s) {
  const auto parts = io::split_char(s, ',');
  if (parts.size() != 3) throw ConfigError("--weights expects three comma-separated numbers");
  std::array<double, 3> w{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto v = io::parse_double(io::trim(parts[i]));
    if (!v) throw ConfigError("--weights: bad number '" + std::string(parts[i]) + "'");
    w[i] = *v;
  }
  try {
    validate_combine_weights(w);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--weights: ") + e.what());
  }
  return w;
}

/// Parses "lo:hi:step" (or a single value) into an inclusive integer schedule.
inline std::vector<int> parse_range(const std::string& flag, const std::string& s) {
  const auto parts = io::split_char(s, ':');
  std::vector<long> v;
  for (auto p : parts) {
    auto x = io::parse_index(io::trim(p));
    if (!x) throw ConfigError(flag + ": expected lo:hi:step, got '" + s + "'");
    v.push_back(static_cast<long>(*x));
  }
  if (v.size() == 1) return {static_cast<int>(v[0])};
  if (v.size() != 3 || v[2] <= 0 || v[0] > v[1]) throw ConfigError(flag + ": expected lo:hi:step, got '" + s + "'");
  std::vector<int> out;
  for (long x = v[0]; x <= v[1]; x += v[2]) out.push_back(static_cast<int>(x));
  return out;
}

// Labels keyed by node name, classes ordered as in load_network.
inline std::pair<std::vector<std::size_t>, std::vector<std::string>> labels_for(
    const std::filesystem::path& path, const std::vector<std::string>& node_names) {
  std::map<std::string, std::string> raw;
  const auto lines = io::read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto toks = io::split_ws(lines[ln]);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks.size() != 2) throw ParseError(path.string(), ln + 1, "expected '<node_id> <class>'");
    raw[std::string(toks[0])] = std::string(toks[1]);
  }
  std::vector<std::string> names;
  for (const auto& [id, cls] : raw) names.push_back(cls);
  auto classes = detail::sorted_class_names(std::move(names));
  std::map<std::string, std::size_t> class_id;
  for (std::size_t c = 0; c < classes.size(); ++c) class_id[classes[c]] = c;
  if (raw.size() != node_names.size())
    throw ConfigError("labels cover " + std::to_string(raw.size()) + " nodes but the embedding has " +
                      std::to_string(node_names.size()));
  std::vector<std::size_t> y;
  for (const auto& name : node_names) {
    auto it = raw.find(name);
    if (it == raw.end()) throw ConfigError("node '" + name + "' has an embedding but no label");
    y.push_back(class_id[it->second]);
  }
  return {std::move(y), std::move(classes)};
}

inline std::string summary_table(const std::vector<std::pair<std::string, const AttributedNetwork*>>& rows) {
  std::ostringstream s;
  s << "dataset\tnodes\tedges\tlabels\tattributes\n";
  for (const auto& [name, net] : rows)
    s << name << '\t' << net->n_nodes() << '\t' << net->n_edges() << '\t' << net->n_classes() << '\t'
      << net->n_attributes() << '\n';
  return s.str();
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_seed(const GlobalOptions& g, SeedOptions o, std::ostream& out) {
  AttributedNetwork net;
  if (o.synthetic) {
    if (!o.edges.empty() || !o.attributes.empty())
      throw ConfigError("--synthetic cannot be combined with --edges/--attributes");
    o.synth.seed = Rng::derive_seed(g.seed, "synthetic");
    net = synth_network(o.synth);
  } else {
    if (o.edges.empty() || o.attributes.empty() || o.labels.empty())
      throw ConfigError("seed needs --edges, --attributes and --labels (or --synthetic)");
    net = load_network(o.edges, o.attributes, std::filesystem::path(o.labels));
  }
  o.plan.seed = g.seed;
  const SeededDataset ds = seed_outliers(net, o.plan);
  write_network(ds.network, o.out);
  write_truth(ds, std::filesystem::path(o.out) / "truth.tsv");
  out << summary_table({{"input", &net}, {"seeded", &ds.network}});
  out << "planted\t" << ds.outlier_ids[0].size() << " structural, " << ds.outlier_ids[1].size() << " attribute, "
      << ds.outlier_ids[2].size() << " combined\n";
  return kOk;
}

inline int cmd_embed(const GlobalOptions& g, const EmbedOptions& o, std::ostream& out, std::ostream& err) {
  const auto net = load_network(o.edges, o.attributes,
                                o.labels.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.labels));
  HyperParams hp;
  if (o.k) hp.k = *o.k;
  else if (net.has_labels()) hp.k = default_dimension(net.n_classes());
  else throw ConfigError("--k is required when no --labels are given");
  hp.alpha = o.alpha;
  hp.beta = o.beta;
  hp.mu = o.mu;
  hp.iters = o.iters;
  hp.eps_o = o.eps_o;
  hp.seed = g.seed;
  hp.nmf_sweeps = o.nmf_sweeps;
  hp.early_stop = o.early_stop;
  if (!o.weights.empty()) hp.combine_weights = parse_weights(o.weights);
  try {
    validate(hp, net.n_nodes(), net.n_attributes());
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  for (const auto& w : net.metadata.warnings) err << "warning: " << w << '\n';
  const FitResult r = fit(net, hp);
  for (const auto& w : r.diagnostics.warnings) err << "warning: " << w << '\n';
  save_result(r.result, o.out);

  out << "k\t" << hp.k << "\nalpha\t" << io::format_double(r.weights.alpha) << "\nbeta\t"
      << io::format_double(r.weights.beta) << "\niteration\tloss\n0\t" << io::format_double(r.result.initial_loss)
      << '\n';
  for (std::size_t t = 0; t < r.result.loss_trace.size(); ++t)
    out << t + 1 << '\t' << io::format_double(r.result.loss_trace[t]) << '\n';
  return kOk;
}

inline int cmd_rank(const RankOptions& o, std::ostream& out) {
  std::optional<std::array<double, 3>> w;
  if (!o.weights.empty()) w = parse_weights(o.weights);
  const ScoreTable t = load_scores(o.scores);
  std::vector<double> score = t.combined;
  if (w) score = final_outlier_score(OutlierScores{t.o1, t.o2, t.o3}, *w);
  const RankedList ranked = rank_by_score(score);
  std::string text = "rank\tnode_id\tscore\n";
  for (std::size_t r = 0; r < ranked.size(); ++r)
    text += std::to_string(r + 1) + '\t' + t.node_names[ranked[r]] + '\t' + io::format_double(score[ranked[r]]) + '\n';
  std::filesystem::create_directories(o.out);
  io::write_text(std::filesystem::path(o.out) / "ranked.tsv", text);
  out << "ranked " << ranked.size() << " nodes\n";
  return kOk;
}

inline int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& out) {
  const EmbeddingResult result = load_result(o.result);
  const auto [labels, classes] = labels_for(o.labels, result.node_names);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < result.node_names.size(); ++i) index[result.node_names[i]] = i;
  std::vector<std::size_t> outliers;
  for (const auto& e : load_truth(o.truth)) {
    auto it = index.find(e.node_name);
    if (it == index.end()) throw ConfigError("truth node '" + e.node_name + "' is missing from the embedding");
    outliers.push_back(it->second);
  }
  std::sort(outliers.begin(), outliers.end());

  EvalOptions opt;
  opt.seed = g.seed;
  opt.reps = o.reps;
  opt.exclude_outliers = o.exclude_outliers;
  opt.train_percents = parse_range("--splits", o.splits);
  opt.recall_levels = parse_range("--levels", o.levels);
  for (int p : opt.train_percents)
    if (p <= 0 || p >= 100) throw ConfigError("--splits: training percentages must lie in (0, 100)");
  for (int l : opt.recall_levels)
    if (l <= 0 || l > 100) throw ConfigError("--levels: percentages must lie in (0, 100]");
  if (outliers.empty()) out << "note: truth file is empty, recall is not reported\n";

  EvalReport rep;
  try {
    rep = evaluate(labels, outliers, result.embedding, result.combined, opt);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  std::filesystem::create_directories(o.out);
  io::write_text(std::filesystem::path(o.out) / "report.json", rep.to_json().dump(2) + '\n');
  io::write_text(std::filesystem::path(o.out) / "report.tsv", rep.to_tsv());
  out << rep.to_tsv();
  return kOk;
}

// ---------------------------------------------------------------------------

namespace detail {

// Appends --key=value for config entries whose flag is absent from argv.
inline std::vector<std::string> merge_config(std::vector<std::string> args,
                                             const std::vector<std::pair<std::string, std::string>>& cfg) {
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  for (const auto& [k, v] : cfg)
    if (k != "config" && !given(k)) extra.push_back("--" + k + "=" + v);
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

inline std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outlier-aware attributed network embedding", "one"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (work is currently sequential)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--config", g.config, "key=value file providing defaults for any flag");

  SeedOptions so;
  auto* seed = app.add_subcommand("seed", "Plant outliers into a labeled network");
  seed->add_option("--edges", so.edges, "Edge list file");
  seed->add_option("--attributes", so.attributes, "Attribute file");
  seed->add_option("--labels", so.labels, "Label file");
  seed->add_flag("--synthetic", so.synthetic, "Generate a stochastic block model network instead of reading one");
  seed->add_option("--nodes", so.synth.n_nodes)->capture_default_str();
  seed->add_option("--classes", so.synth.n_classes)->capture_default_str();
  seed->add_option("--p-in", so.synth.p_in)->capture_default_str();
  seed->add_option("--p-out", so.synth.p_out)->capture_default_str();
  seed->add_option("--n-attrs", so.synth.n_attrs)->capture_default_str();
  seed->add_option("--attr-signal", so.synth.attr_signal)->capture_default_str();
  seed->add_option("--fraction", so.plan.total_fraction, "Fraction of outliers to plant")->capture_default_str();
  seed->add_option("--degree-band", so.plan.degree_band, "Relative degree band")->capture_default_str();
  seed->add_option("--out", so.out, "Output directory")->required();

  EmbedOptions eo;
  auto* embed = app.add_subcommand("embed", "Fit embeddings and outlier scores");
  embed->add_option("--edges", eo.edges, "Edge list file")->required();
  embed->add_option("--attributes", eo.attributes, "Attribute file")->required();
  embed->add_option("--labels", eo.labels, "Label file (sets the default --k)");
  embed->add_option("--k", eo.k, "Embedding dimension (default 3 x #labels)");
  embed->add_option("--alpha", eo.alpha, "Attribute loss weight (default: calibrated)");
  embed->add_option("--beta", eo.beta, "Disagreement loss weight (default: calibrated)");
  embed->add_option("--mu", eo.mu)->capture_default_str();
  embed->add_option("--iters", eo.iters)->capture_default_str();
  embed->add_option("--eps-o", eo.eps_o)->capture_default_str();
  embed->add_option("--weights", eo.weights, "Combine weights w1,w2,w3 (default 0.25,0.5,0.25)");
  embed->add_option("--nmf-sweeps", eo.nmf_sweeps)->capture_default_str();
  embed->add_option("--early-stop", eo.early_stop, "Stop when the relative loss decrease falls below this");
  embed->add_option("--out", eo.out, "Output directory")->required();

  RankOptions ro;
  auto* rank = app.add_subcommand("rank-outliers", "Rank nodes by outlier score");
  rank->add_option("--scores", ro.scores, "scores.tsv written by embed")->required();
  rank->add_option("--weights", ro.weights, "Recombine o1,o2,o3 with these weights");
  rank->add_option("--out", ro.out, "Output directory")->required();

  EvaluateOptions vo;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Recall, classification and clustering metrics");
  evaluate_cmd->add_option("--result", vo.result, "Directory holding embedding.tsv and scores.tsv")->required();
  evaluate_cmd->add_option("--labels", vo.labels, "Label file")->required();
  evaluate_cmd->add_option("--truth", vo.truth, "Outlier truth file written by seed")->required();
  evaluate_cmd->add_option("--splits", vo.splits, "Training percentages lo:hi:step")->capture_default_str();
  evaluate_cmd->add_option("--levels", vo.levels, "Recall levels lo:hi:step")->capture_default_str();
  evaluate_cmd->add_option("--reps", vo.reps)->capture_default_str();
  evaluate_cmd->add_flag("--exclude-outliers", vo.exclude_outliers, "Drop planted nodes from classification");
  evaluate_cmd->add_option("--out", vo.out, "Output directory")->required();

  try {
    if (auto path = detail::find_config(args)) args = detail::merge_config(args, read_config(*path));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);  // CLI11 consumes a reversed vector
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }

  try {
    if (*seed) return cmd_seed(g, so, out);
    if (*embed) return cmd_embed(g, eo, out, err);
    if (*rank) return cmd_rank(ro, out);
    return cmd_evaluate(g, vo, out);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace cli
}  // namespace one

#endif  // ONE_CLI_HPP
