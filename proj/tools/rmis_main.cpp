// rmis: run, batch, deviation, scaling and oracle experiments for the
// rational MIS protocols.

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <iostream>
#include <memory>
#include <sstream>

#include "rmis/analysis.hpp"
#include "rmis/config.hpp"
#include "rmis/errors.hpp"
#include "rmis/oracle.hpp"
#include "rmis/record_io.hpp"

namespace {

using namespace rmis;

constexpr int kExitConfig = 2;
constexpr int kExitFault = 3;

// Flags shared by run, trials and deviate. Values given on the command line
// override those from --config.
struct CommonFlags {
  std::string config_path;
  std::string graph;
  std::uint64_t graph_seed = 0;
  std::string protocol;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  std::uint64_t round_cap = 0;
  double rank_bits_c = 3.0;
  std::uint32_t rank_bits = 0;
  std::vector<double> v;
  std::string deviate;
  std::string signatures;
  std::size_t garbage_bytes = 8;
  std::string format;
  bool trace = false;
  std::string output;
  int jobs = 0;
  bool dump_config = false;

  std::map<std::string, CLI::Option*> opts;
};

void add_common(CLI::App* app, CommonFlags& f) {
  auto& o = f.opts;
  o["config"] = app->add_option("--config", f.config_path, "JSON config file (flags override its values)");
  o["graph"] = app->add_option("--graph", f.graph,
                               "Graph family (path:N, cycle:N, complete:N, star:N, edgeless:N, "
                               "random_regular:N:D, erdos_renyi:N:P or erdos_renyi:N:C/n) or edge-list file "
                               "[default: cycle:16]");
  o["graph_seed"] = app->add_option("--graph-seed", f.graph_seed, "Seed for random graph families [default: 0]");
  o["protocol"] = app->add_option("--protocol", f.protocol, "rps or rank [default: rps]");
  o["seed"] = app->add_option("--seed", f.seed, "First master seed [default: 0]")->envname("RMIS_SEED");
  o["trials"] = app->add_option("--trials", f.trials, "Number of runs, seeds seed..seed+trials-1 [default: 1]");
  o["round_cap"] = app->add_option("--round-cap", f.round_cap,
                                   "Round cap; 0 uses 60*ceil(log2 n)*3^(2*maxdeg) for rps and "
                                   "60*ceil(log2 n) for rank [default: 0]");
  o["rank_bits_c"] = app->add_option("--rank-bits-c", f.rank_bits_c, "Rank length L = ceil(c*log2 n) [default: 3]");
  o["rank_bits"] = app->add_option("--rank-bits", f.rank_bits, "Explicit rank length L, overrides c [default: 0]");
  o["v"] = app->add_option("--v", f.v, "Payoff: one value for all nodes or one per node [default: 1]");
  o["deviate"] = app->add_option("--deviate", f.deviate,
                                 "Deviation, e.g. node=0,strategy=silent[,params=1:0:0][,activation=3]");
  o["signatures"] = app->add_option("--signatures", f.signatures, "ideal or ed25519 [default: ideal]");
  o["garbage_bytes"] = app->add_option("--garbage-bytes", f.garbage_bytes, "Garbage payload size [default: 8]");
  o["format"] = app->add_option("--format", f.format, "json-lines or csv [default: json-lines]");
  o["trace"] = app->add_flag("--trace", f.trace, "Include per-round traces in run records");
  o["output"] = app->add_option("--output", f.output, "Output path, - for stdout [default: -]");
  app->add_option("--jobs", f.jobs, "Worker threads, 0 for all cores [default: 0]")->envname("RMIS_JOBS");
  app->add_flag("--dump-config", f.dump_config, "Print the effective config as JSON and exit");
}

bool given(const CommonFlags& f, const std::string& key) {
  auto it = f.opts.find(key);
  return it != f.opts.end() && it->second->count() > 0;
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) c = load_config_file(f.config_path);
  if (given(f, "graph")) c.graph = f.graph;
  if (given(f, "graph_seed")) c.graph_seed = f.graph_seed;
  if (given(f, "protocol")) c.protocol = parse_protocol(f.protocol);
  if (given(f, "seed")) c.seed = f.seed;
  if (given(f, "trials")) c.trials = f.trials;
  if (given(f, "round_cap")) c.round_cap = f.round_cap;
  if (given(f, "rank_bits_c")) c.rank_bits_c = f.rank_bits_c;
  if (given(f, "rank_bits")) c.rank_bits = f.rank_bits;
  if (given(f, "v")) c.v = f.v;
  if (given(f, "deviate")) c.deviation = parse_deviation(f.deviate);
  if (given(f, "signatures")) c.signatures = parse_signature_backend(f.signatures);
  if (given(f, "garbage_bytes")) c.garbage_bytes = f.garbage_bytes;
  if (given(f, "format")) c.output.format = f.format;
  if (given(f, "trace")) c.output.trace = f.trace;
  if (given(f, "output")) c.output.path = f.output;
  if (c.trials == 0) throw ConfigError("trials must be at least 1");
  // Re-parse so flag-built configs pass the same checks as files.
  return config_from_json(config_to_json(c));
}

void warn_rank_bits(const ExperimentConfig& c) {
  if (c.protocol == Protocol::Rank && c.rank_bits == 0 && c.rank_bits_c <= 2.0) {
    std::cerr << "warning: rank_bits_c = " << c.rank_bits_c
              << " <= 2; rank collisions are no longer negligible and termination is not guaranteed w.h.p.\n";
  }
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output '" + path + "'");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig c = resolve(f);
  if (f.dump_config) {
    std::cout << config_to_json(c).dump(2) << '\n';
    return 0;
  }
  warn_rank_bits(c);
  const RunConfig rc = make_run_config(c, build_graph(c));
  Sink sink(c.output.path);
  const bool csv = c.output.format == "csv";
  if (csv) sink.out() << run_csv_header() << '\n';
  std::uint64_t runs = 0, terminated = 0, detected = 0, fired = 0;
  for_each_run(rc, c.trials, c.seed, f.jobs, [&](const RunRecord& r) {
    ++runs;
    terminated += r.terminated ? 1 : 0;
    for (const auto& d : r.deviations) {
      detected += d.detected ? 1 : 0;
      fired += d.fired ? 1 : 0;
    }
    if (csv) {
      write_csv_row(sink.out(), r);
    } else {
      write_json_line(sink.out(), r);
    }
  });
  nlohmann::json tail = {{"runs", runs}, {"terminated_runs", terminated}};
  if (c.deviation) {
    tail["detected_runs"] = detected;
    tail["fired_runs"] = fired;
  }
  std::cerr << tail.dump() << '\n';
  return 0;
}

int cmd_trials(const CommonFlags& f) {
  const ExperimentConfig c = resolve(f);
  if (f.dump_config) {
    std::cout << config_to_json(c).dump(2) << '\n';
    return 0;
  }
  warn_rank_bits(c);
  const RunConfig rc = make_run_config(c, build_graph(c));
  const TrialSummary s = run_trials(rc, c.trials, c.seed, f.jobs);
  Sink sink(c.output.path);
  if (c.output.format == "csv") {
    sink.out() << summary_csv_header(rc.graph->size()) << '\n';
    write_summary_csv_row(sink.out(), s);
  } else {
    sink.out() << summary_to_json(s).dump() << '\n';
  }
  return 0;
}

int cmd_deviate(const CommonFlags& f) {
  ExperimentConfig c = resolve(f);
  if (f.dump_config) {
    std::cout << config_to_json(c).dump(2) << '\n';
    return 0;
  }
  if (!c.deviation) throw ConfigError("deviate needs --deviate or a deviation in the config");
  warn_rank_bits(c);
  const DeviationSpec spec = *c.deviation;
  c.deviation.reset();
  const RunConfig rc = make_run_config(c, build_graph(c));
  check_deviation(spec, rc.protocol, rc.graph->size());
  const PairedComparison cmp = paired_deviation_test(rc, spec, c.trials, c.seed, f.jobs);
  nlohmann::json j = comparison_to_json(cmp);
  j["deviation"] = format_deviation(spec);
  j["detectable"] = detectable(spec.kind);
  Sink sink(c.output.path);
  sink.out() << j.dump() << '\n';
  return 0;
}

struct CurveFlags {
  std::string family = "cycle:32";
  std::uint64_t graph_seed = 0;
  std::vector<std::size_t> n_list;
  std::string protocol = "rps";
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::string output = "-";
  int jobs = 0;
};

int cmd_curve(const CurveFlags& f) {
  const FamilySpec family = parse_family(f.family, f.graph_seed);
  std::vector<std::size_t> ns = f.n_list;
  if (ns.empty()) ns = {family.n};
  const auto points = termination_curve(family, ns, parse_protocol(f.protocol), f.trials, f.seed, f.jobs);
  Sink sink(f.output);
  sink.out() << curve_csv_header() << '\n';
  for (const auto& p : points) write_curve_csv_row(sink.out(), p);
  return 0;
}

struct OracleFlags {
  std::string graph = "complete:2";
  std::string protocol = "rps";
  std::uint32_t rank_bits = 16;
  std::string deviate;
};

int cmd_oracle(const OracleFlags& f) {
  ExperimentConfig c;
  c.graph = f.graph;
  const auto g = build_graph(c);
  std::optional<DeviationSpec> dev;
  if (!f.deviate.empty()) dev = parse_deviation(f.deviate);
  const OracleResult r = exact_small_oracle(*g, parse_protocol(f.protocol), f.rank_bits, dev);
  auto line = [](const std::string& name, const Rational& q) {
    std::cout << name << " = " << q << " (" << to_decimal(q) << ")\n";
  };
  line("expected_iterations", r.expected_iterations);
  for (NodeId i = 0; i < g->size(); ++i) {
    const std::string id = std::to_string(i);
    line("inclusion[" + id + "]", r.inclusion[i]);
    line("first_iteration_join[" + id + "]", r.first_iteration_join[i]);
    line("expected_utility[" + id + "]", r.expected_utility[i]);
  }
  return 0;
}

struct ValidateFlags {
  std::string config_path;
  std::string graph;
  std::uint64_t graph_seed = 0;
  std::string records;
};

int cmd_validate(const ValidateFlags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) c = load_config_file(f.config_path);
  if (!f.graph.empty()) c.graph = f.graph;
  if (!f.graph.empty() || f.graph_seed) c.graph_seed = f.graph_seed;
  const auto g = build_graph(c);
  validate(*g);
  make_run_config(c, g);
  std::cout << "graph ok: n=" << g->size() << " edges=" << g->edge_count() << " max_degree=" << max_degree(*g)
            << '\n';
  if (f.records.empty()) return 0;
  std::ifstream in(f.records);
  if (!in) throw ConfigError("cannot open records '" + f.records + "'");
  std::string text;
  std::uint64_t checked = 0, bad = 0;
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("records: ") + e.what());
    }
    const RunRecord r = record_from_json(j);
    ++checked;
    if (r.outputs.size() != g->size()) throw FormatError("record size does not match the graph");
    std::vector<NodeId> ones;
    for (NodeId i = 0; i < r.outputs.size(); ++i) {
      if (r.outputs[i] == OutputValue::One) ones.push_back(i);
    }
    if (r.terminated && r.deviations.empty() && !is_maximal_independent_set(*g, ones)) {
      ++bad;
      std::cerr << "seed " << r.seed << ": output is not a maximal independent set\n";
    }
  }
  std::cout << "records checked: " << checked << ", invalid: " << bad << '\n';
  if (bad) throw ContractViolation(std::to_string(bad) + " record(s) failed validation");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analysis harness for rational maximal-independent-set protocols"};
  app.require_subcommand(1);

  CommonFlags run_flags, trial_flags, dev_flags;
  auto* run = app.add_subcommand("run", "Execute runs and stream one record per run");
  add_common(run, run_flags);
  auto* trials = app.add_subcommand("trials", "Run a batch and print aggregate statistics");
  add_common(trials, trial_flags);
  auto* deviate = app.add_subcommand("deviate", "Paired honest-versus-deviant utility comparison");
  add_common(deviate, dev_flags);

  CurveFlags curve_flags;
  auto* curve = app.add_subcommand("curve", "Median and p95 iterations as n grows (CSV)");
  curve->add_option("--family", curve_flags.family, "Graph family; its n is replaced by each --n [default: cycle:32]");
  curve->add_option("--graph-seed", curve_flags.graph_seed, "Seed for random families [default: 0]");
  curve->add_option("--n", curve_flags.n_list, "Node counts")->delimiter(',');
  curve->add_option("--protocol", curve_flags.protocol, "rps or rank [default: rps]");
  curve->add_option("--trials", curve_flags.trials, "Runs per point [default: 1000]");
  curve->add_option("--seed", curve_flags.seed, "First master seed [default: 0]")->envname("RMIS_SEED");
  curve->add_option("--output", curve_flags.output, "Output path, - for stdout [default: -]");
  curve->add_option("--jobs", curve_flags.jobs, "Worker threads, 0 for all cores [default: 0]")->envname("RMIS_JOBS");

  OracleFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "Exact expected values on graphs with at most 3 nodes");
  oracle->add_option("--graph", oracle_flags.graph, "Graph family or edge-list file [default: complete:2]");
  oracle->add_option("--protocol", oracle_flags.protocol, "rps or rank [default: rps]");
  oracle->add_option("--rank-bits", oracle_flags.rank_bits, "Rank length L [default: 16]");
  oracle->add_option("--deviate", oracle_flags.deviate, "Optional biased_moves deviation (rps)");

  ValidateFlags validate_flags;
  auto* val = app.add_subcommand("validate", "Check a graph/config and optionally a record stream");
  val->add_option("--config", validate_flags.config_path, "JSON config file");
  val->add_option("--graph", validate_flags.graph, "Graph family or edge-list file");
  val->add_option("--graph-seed", validate_flags.graph_seed, "Seed for random families [default: 0]");
  val->add_option("--records", validate_flags.records, "JSON-lines records to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*trials) return cmd_trials(trial_flags);
    if (*deviate) return cmd_deviate(dev_flags);
    if (*curve) return cmd_curve(curve_flags);
    if (*oracle) return cmd_oracle(oracle_flags);
    if (*val) return cmd_validate(validate_flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EngineFault& e) {
    std::cerr << "engine fault: " << e.what() << '\n';
    return kExitFault;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitFault;
  }
  return 0;
}
