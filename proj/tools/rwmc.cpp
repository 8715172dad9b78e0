// rwmc: random-walk sampling of networks with certified multivariate
// Monte Carlo error.
//
//   rwmc gen --er N P --seed S [--lcc] [-o FILE]
//   rwmc stats GRAPH [--features LIST] [--attrs FILE --attr DECL...] [--csv FILE]
//   rwmc sample GRAPH --walk srw|mh [--features LIST] [stopping options]
//   rwmc experiment [--config FILE] [options]
//   rwmc miness -p P [--alpha A] [--eps E]
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rwmc/rwmc.hpp"

namespace {

using namespace rwmc;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct GraphSource {
  std::string path;
  std::vector<double> er;  // {n, p} when generating
  std::uint64_t er_seed = 1;
  bool lcc = false;
  std::string attrs_path;
  std::vector<std::string> attr_decls;
  std::string label_column = "id";
  char delim = ',';
};

struct LoadedGraph {
  Graph graph;
  AttributeTable attrs;
  bool has_attrs = false;

  const AttributeTable* attributes() const { return has_attrs ? &attrs : nullptr; }
};

std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (path == "-") return std::make_unique<std::istream>(std::cin.rdbuf());
  auto f = std::make_unique<std::ifstream>(path);
  if (!*f) throw Error("cannot open '" + path + "'");
  return f;
}

LoadedGraph load(const GraphSource& src) {
  LoadedGraph out;
  if (!src.er.empty()) {
    if (src.er.size() != 2) throw InvalidArgument("--er expects N P");
    out.graph = generate_er(static_cast<std::size_t>(src.er[0]), src.er[1], src.er_seed);
  } else {
    if (src.path.empty()) throw InvalidArgument("no graph given");
    auto in = open_input(src.path);
    IngestReport report;
    out.graph = load_edge_list(*in, &report);
    if (report.dropped_duplicates + report.dropped_self_loops > 0)
      std::cerr << "warning: dropped " << report.dropped_duplicates << " duplicate edges and "
                << report.dropped_self_loops << " self loops\n";
  }
  if (!src.attrs_path.empty()) {
    std::vector<AttributeDecl> schema;
    for (const auto& d : src.attr_decls) schema.push_back(parse_attribute_decl(d));
    auto in = open_input(src.attrs_path);
    out.attrs = load_attributes(out.graph, *in, schema, src.label_column, src.delim);
    out.has_attrs = true;
    if (out.attrs.unknown_labels_skipped > 0)
      std::cerr << "warning: skipped " << out.attrs.unknown_labels_skipped << " attribute rows for unknown nodes\n";
  }
  if (src.lcc) {
    auto sub = largest_connected_component(out.graph);
    if (out.has_attrs) out.attrs = out.attrs.remap(sub.old_ids);
    out.graph = std::move(sub.graph);
  }
  return out;
}

void add_graph_options(CLI::App* cmd, GraphSource& src, bool positional) {
  if (positional) {
    cmd->add_option("graph", src.path, "Edge list file ('-' for stdin)")->required();
  } else {
    auto* g = cmd->add_option("--graph", src.path, "Edge list file ('-' for stdin)");
    auto* er = cmd->add_option("--er", src.er, "Generate G(N, P) instead of reading a file")->expected(2);
    g->excludes(er);
    cmd->add_option("--er-seed", src.er_seed, "Seed for the generated graph");
  }
  cmd->add_flag("--lcc", src.lcc, "Restrict to the largest connected component");
  cmd->add_option("--attrs", src.attrs_path, "Delimited node attribute file with header row");
  cmd->add_option("--attr", src.attr_decls, "Attribute declaration: name:cat[:L1|L2...] or name:num[:default]");
  cmd->add_option("--label-column", src.label_column, "Attribute column holding node labels");
  cmd->add_option("--delim", src.delim, "Attribute file delimiter");
}

struct StoppingOptions {
  StoppingConfig cfg;
  std::string batch = "sqrt";

  void add(CLI::App* cmd) {
    cmd->add_option("--eps", cfg.eps, "Relative precision")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", cfg.alpha, "One minus the confidence level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mstar", cfg.m_star, "Minimum simulation effort");
    cmd->add_option("--check-interval", cfg.check_interval, "Steps between stopping checks")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-steps", cfg.max_steps, "Hard step budget");
    cmd->add_option("--batch", batch, "Batch size rule")->check(CLI::IsMember({"sqrt", "cuberoot"}));
    cmd->add_option("--burn-in", cfg.burn_in, "Transitions discarded before recording");
  }

  StoppingConfig finish() const {
    StoppingConfig out = cfg;
    out.batch_rule = parse_batch_rule(batch);
    return out;
  }
};

std::string fixed(double x, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << x;
  return o.str();
}

int cmd_gen(const std::vector<double>& er, std::uint64_t seed, bool lcc, const std::string& out_path) {
  if (er.size() != 2) throw InvalidArgument("--er expects N P");
  Graph g = generate_er(static_cast<std::size_t>(er[0]), er[1], seed);
  if (lcc) g = largest_connected_component(g).graph;
  std::ostream* summary = &std::cout;
  if (out_path.empty() || out_path == "-") {
    write_edge_list(std::cout, g);
    summary = &std::cerr;
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write '" + out_path + "'");
    write_edge_list(f, g);
  }
  *summary << "n=" << g.num_nodes() << " n_e=" << g.num_edges() << '\n';
  return 0;
}

int cmd_stats(const GraphSource& src, const std::string& features, const std::string& csv_path) {
  auto lg = load(src);
  auto spec = parse_feature_spec(features);
  auto means = exact_means(lg.graph, spec, lg.attributes());
  auto names = spec.names();
  std::cout << "n=" << lg.graph.num_nodes() << " n_e=" << lg.graph.num_edges() << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) std::cout << names[j] << ' ' << fixed(means[j], 4) << '\n';
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw Error("cannot write '" + csv_path + "'");
    f << "feature,mean\n";
    for (std::size_t j = 0; j < names.size(); ++j) f << names[j] << ',' << detail::fmt_num(means[j]) << '\n';
  }
  return 0;
}

void print_report(std::ostream& out, const TerminationReport& rep, const std::vector<std::string>& names,
                  const std::optional<std::vector<double>>& truth, std::uint64_t min_ess_target) {
  out << "walk              " << to_string(rep.kind) << '\n'
      << "seed              " << rep.seed << '\n'
      << "start node        " << rep.start << '\n'
      << "termination step  " << rep.termination_step << (rep.budget_terminated ? " (budget-terminated)" : "")
      << '\n'
      << "ESS               " << (rep.ess ? fixed(*rep.ess, 2) : "NA") << " (minimum " << min_ess_target << ")\n"
      << "T(eps)            " << (rep.ratio_stat ? fixed(*rep.ratio_stat, 4) : "NA") << '\n'
      << "unique nodes      " << rep.unique_nodes << '\n';
  if (rep.acceptance_rate) out << "acceptance rate   " << fixed(*rep.acceptance_rate, 4) << '\n';
  out << "batches           " << rep.batches << " x " << rep.batch_size << '\n';
  if (rep.covered) out << "truth covered     " << (*rep.covered ? "yes" : "no") << '\n';
  out << "estimates (standard error)" << (truth ? "  truth" : "") << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << "  " << std::left << std::setw(16) << names[j] << std::right << fixed(rep.estimates[j], 6) << " ("
        << fixed(rep.std_errors[j], 6) << ")";
    if (truth) out << "  " << fixed((*truth)[j], 6);
    out << '\n';
  }
}

int cmd_sample(const GraphSource& src, const std::string& walk, const std::string& features,
               const StoppingOptions& sopt, std::uint64_t seed, bool truth_from_graph, const std::string& csv_path,
               const std::string& trace_path, bool timing) {
  auto lg = load(src);
  auto spec = parse_feature_spec(features);
  auto kind = parse_walk_kind(walk);
  auto cfg = sopt.finish();
  Sampler sampler(lg.graph, spec, lg.attributes());
  std::optional<std::vector<double>> truth;
  if (truth_from_graph) truth = exact_means(lg.graph, spec, lg.attributes());
  WalkTrace trace;
  auto rep = sampler.run(kind, cfg, seed, truth, trace_path.empty() ? nullptr : &trace);
  print_report(std::cout, rep, spec.names(), truth, min_ess(spec.size(), cfg.alpha, cfg.eps));
  std::cout << '\n' << report_csv_header(spec.size()) << '\n'
            << report_csv_row(0, kind, seed, rep, spec.size(), timing) << '\n';
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw Error("cannot write '" + csv_path + "'");
    f << report_csv_header(spec.size()) << '\n' << report_csv_row(0, kind, seed, rep, spec.size(), timing) << '\n';
  }
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    if (!f) throw Error("cannot write '" + trace_path + "'");
    write_trace(f, trace, lg.graph);
  }
  return 0;
}

struct ExperimentOptions {
  std::vector<std::string> walks{"srw", "mh"};
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  std::size_t threads = 1;
  bool truth_from_graph = false;
  std::string out_replications;
  std::string out_summary;
  std::string out_histogram;
  std::size_t bins = 30;
  bool no_timing = false;
};

int cmd_experiment(const GraphSource& src, const std::string& features, const StoppingOptions& sopt,
                   const ExperimentOptions& eo) {
  auto lg = load(src);
  auto spec = parse_feature_spec(features);
  Sampler sampler(lg.graph, spec, lg.attributes());
  ExperimentPlan plan;
  plan.kinds.clear();
  for (const auto& w : eo.walks) plan.kinds.push_back(parse_walk_kind(w));
  plan.stopping = sopt.finish();
  plan.replications = eo.replications;
  plan.base_seed = eo.base_seed;
  plan.threads = eo.threads;
  if (eo.truth_from_graph) plan.truth = exact_means(lg.graph, spec, lg.attributes());

  auto results = run_experiment(sampler, plan);
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.report) {
      ++failures;
      std::cerr << "warning: replication " << r.replication << " (" << to_string(r.kind) << ") failed: " << r.error
                << '\n';
    }
  }
  if (failures > 0) std::cerr << "warning: summary computed over successful replications only\n";

  const auto names = spec.names();
  const auto summaries = summarize(results, spec.size());
  std::cout << "graph n=" << lg.graph.num_nodes() << " n_e=" << lg.graph.num_edges() << ", p=" << spec.size()
            << ", minimum ESS " << min_ess(spec.size(), plan.stopping.alpha, plan.stopping.eps) << "\n\n";
  write_summary_text(std::cout, summaries, names, plan.truth);

  auto write_file = [](const std::string& path, auto&& body) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    body(f);
  };
  if (!eo.out_replications.empty())
    write_file(eo.out_replications,
               [&](std::ostream& f) { write_replications_csv(f, results, spec.size(), !eo.no_timing); });
  if (!eo.out_summary.empty())
    write_file(eo.out_summary, [&](std::ostream& f) { write_summary_csv(f, summaries, names); });
  if (!eo.out_histogram.empty())
    write_file(eo.out_histogram, [&](std::ostream& f) { write_histogram_csv(f, results, names, eo.bins); });
  return 0;
}

}  // namespace

// CLI11 does not read config files attached to a subcommand, so the
// experiment file is expanded into "--key value..." arguments placed ahead
// of the command-line ones. Keys given on the command line win.
std::vector<std::string> expand_experiment_config(const std::vector<std::string>& args) {
  auto sub = std::find(args.begin() + 1, args.end(), std::string("experiment"));
  if (sub == args.end()) return args;
  std::string path;
  std::vector<std::string> given;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) {
      path = *(it + 1);
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
    }
    if (it->rfind("--", 0) == 0) given.push_back(it->substr(2, it->find('=') == std::string::npos ? std::string::npos
                                                                                                 : it->find('=') - 2));
    if (*it == "-R") given.emplace_back("replications");
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> out(args.begin(), sub + 1);
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "experiment")) continue;
    if (item.name == "config" || std::find(given.begin(), given.end(), item.name) != given.end()) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") out.push_back("--" + item.name);
      continue;
    }
    out.push_back("--" + item.name);
    out.insert(out.end(), item.inputs.begin(), item.inputs.end());
  }
  out.insert(out.end(), sub + 1, args.end());
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"Random-walk network sampling with multivariate stopping rules"};
  app.require_subcommand(1);

  // gen
  std::vector<double> gen_er;
  std::uint64_t gen_seed = 1;
  bool gen_lcc = false;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate an Erdos-Renyi edge list");
  gen->add_option("--er", gen_er, "Node count and edge probability")->expected(2)->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_flag("--lcc", gen_lcc, "Keep only the largest connected component (relabelled 0..n-1)");
  gen->add_option("-o,--output", gen_out, "Output file (stdout when omitted)");

  // stats
  GraphSource stats_src;
  std::string stats_features = "degree,cc";
  std::string stats_csv;
  auto* stats = app.add_subcommand("stats", "Exact population means of the feature vector");
  add_graph_options(stats, stats_src, true);
  stats->add_option("--features", stats_features, "Comma-separated feature list");
  stats->add_option("--csv", stats_csv, "Also write feature,mean CSV");

  // sample
  GraphSource sample_src;
  std::string sample_walk = "srw";
  std::string sample_features = "degree,cc";
  StoppingOptions sample_stop;
  std::uint64_t sample_seed = 1;
  bool sample_truth = false;
  std::string sample_csv;
  std::string sample_trace;
  bool sample_no_timing = false;
  auto* sample = app.add_subcommand("sample", "Run one walk until the stopping rule fires");
  add_graph_options(sample, sample_src, true);
  sample->add_option("--walk", sample_walk, "srw or mh")->check(CLI::IsMember({"srw", "mh"}));
  sample->add_option("--features", sample_features, "Comma-separated feature list");
  sample_stop.add(sample);
  sample->add_option("--seed", sample_seed, "Walk seed");
  sample->add_flag("--truth-from-graph", sample_truth, "Compute exact means and report coverage");
  sample->add_option("--csv", sample_csv, "Write the report row to a CSV file");
  sample->add_option("--trace-dump", sample_trace, "Write per-step t,node,label,accepted records");
  sample->add_flag("--no-timing", sample_no_timing, "Write 0 in the wall-clock column");

  // experiment
  GraphSource exp_src;
  std::string exp_features = "degree,cc";
  StoppingOptions exp_stop;
  ExperimentOptions exp_opts;
  auto* experiment = app.add_subcommand("experiment", "Replicated runs with summary tables");
  std::string exp_config;
  experiment->add_option("--config", exp_config, "Experiment configuration file (TOML/INI keys mirror the flags)");
  add_graph_options(experiment, exp_src, false);
  experiment->add_option("--features", exp_features, "Comma-separated feature list");
  exp_stop.add(experiment);
  experiment->add_option("--walks", exp_opts.walks, "Walk kinds to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"srw", "mh"}));
  experiment->add_option("-R,--replications", exp_opts.replications, "Replications per walk kind")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--base-seed", exp_opts.base_seed, "Replication r uses base seed + r");
  experiment->add_option("--threads", exp_opts.threads, "Parallel replications")->check(CLI::PositiveNumber);
  experiment->add_flag("--truth-from-graph", exp_opts.truth_from_graph, "Compute exact means for coverage");
  experiment->add_option("--out-replications", exp_opts.out_replications, "Per-replication CSV");
  experiment->add_option("--out-summary", exp_opts.out_summary, "Summary CSV");
  experiment->add_option("--out-histogram", exp_opts.out_histogram, "Histogram bin-count CSV");
  experiment->add_option("--bins", exp_opts.bins, "Histogram bins")->check(CLI::PositiveNumber);
  experiment->add_flag("--no-timing", exp_opts.no_timing, "Write 0 in the wall-clock column");

  // miness
  std::size_t mi_p = 1;
  double mi_alpha = 0.05;
  double mi_eps = 0.05;
  auto* miness = app.add_subcommand("miness", "Minimum effective sample size for p features");
  miness->add_option("-p", mi_p, "Number of features")->required()->check(CLI::PositiveNumber);
  miness->add_option("--alpha", mi_alpha, "One minus the confidence level")->check(CLI::Range(0.0, 1.0));
  miness->add_option("--eps", mi_eps, "Relative precision")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_experiment_config(args);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_er, gen_seed, gen_lcc, gen_out);
    if (stats->parsed()) return cmd_stats(stats_src, stats_features, stats_csv);
    if (sample->parsed())
      return cmd_sample(sample_src, sample_walk, sample_features, sample_stop, sample_seed, sample_truth, sample_csv,
                        sample_trace, !sample_no_timing);
    if (experiment->parsed()) return cmd_experiment(exp_src, exp_features, exp_stop, exp_opts);
    if (miness->parsed()) {
      std::cout << min_ess(mi_p, mi_alpha, mi_eps) << '\n';
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
