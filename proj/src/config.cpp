#include "rmis/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rmis/errors.hpp"

namespace rmis {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"graph", "graph_seed", "protocol", "seed", "trials", "round_cap", "rank_bits_c", "rank_bits",
                  "v", "deviation", "signatures", "garbage_bytes", "output"},
                 "config");
  ExperimentConfig c;
  if (j.contains("graph")) c.graph = get<std::string>(j, "graph");
  if (j.contains("graph_seed")) c.graph_seed = get<std::uint64_t>(j, "graph_seed");
  if (j.contains("protocol")) c.protocol = parse_protocol(get<std::string>(j, "protocol"));
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("trials")) c.trials = get<std::uint64_t>(j, "trials");
  if (j.contains("round_cap")) c.round_cap = get<std::uint64_t>(j, "round_cap");
  if (j.contains("rank_bits_c")) c.rank_bits_c = get<double>(j, "rank_bits_c");
  if (j.contains("rank_bits")) c.rank_bits = get<std::uint32_t>(j, "rank_bits");
  if (j.contains("v")) {
    const json& v = j.at("v");
    if (v.is_number()) {
      c.v = {v.get<double>()};
    } else {
      c.v = get<std::vector<double>>(j, "v");
    }
  }
  if (j.contains("deviation") && !j.at("deviation").is_null()) {
    c.deviation = parse_deviation(get<std::string>(j, "deviation"));
  }
  if (j.contains("signatures")) c.signatures = parse_signature_backend(get<std::string>(j, "signatures"));
  if (j.contains("garbage_bytes")) c.garbage_bytes = get<std::size_t>(j, "garbage_bytes");
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"format", "trace", "path"}, "output");
    if (o.contains("format")) c.output.format = get<std::string>(o, "format");
    if (o.contains("trace")) c.output.trace = get<bool>(o, "trace");
    if (o.contains("path")) c.output.path = get<std::string>(o, "path");
  }
  if (c.output.format != "json-lines" && c.output.format != "csv") {
    throw ConfigError("output.format must be json-lines or csv");
  }
  if (c.trials == 0) throw ConfigError("trials must be at least 1");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["graph"] = c.graph;
  j["graph_seed"] = c.graph_seed;
  j["protocol"] = std::string(to_string(c.protocol));
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["round_cap"] = c.round_cap;
  j["rank_bits_c"] = c.rank_bits_c;
  j["rank_bits"] = c.rank_bits;
  j["v"] = c.v;
  j["deviation"] = c.deviation ? json(format_deviation(*c.deviation)) : json(nullptr);
  j["signatures"] = std::string(to_string(c.signatures));
  j["garbage_bytes"] = c.garbage_bytes;
  j["output"] = {{"format", c.output.format}, {"trace", c.output.trace}, {"path", c.output.path}};
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

bool is_family_text(const std::string& graph) {
  static const std::set<std::string> kinds{"path", "cycle", "complete", "star", "edgeless", "random_regular",
                                           "erdos_renyi"};
  const auto colon = graph.find(':');
  return colon != std::string::npos && kinds.count(graph.substr(0, colon));
}

std::shared_ptr<const Graph> build_graph(const ExperimentConfig& c) {
  if (is_family_text(c.graph)) return std::make_shared<const Graph>(make_family(parse_family(c.graph, c.graph_seed)));
  return std::make_shared<const Graph>(load_edge_list_file(c.graph));
}

RunConfig make_run_config(const ExperimentConfig& c, std::shared_ptr<const Graph> graph) {
  RunConfig r;
  r.graph = std::move(graph);
  r.protocol = c.protocol;
  r.master_seed = c.seed;
  r.round_cap = c.round_cap;
  r.rank_bits = c.rank_bits;
  r.rank_bits_c = c.rank_bits_c;
  r.payoff = c.v;
  if (c.deviation) r.deviations = {*c.deviation};
  r.record_trace = c.output.trace;
  r.signatures = c.signatures;
  r.garbage_bytes = c.garbage_bytes;
  validate_config(r);
  return r;
}

}  // namespace rmis
