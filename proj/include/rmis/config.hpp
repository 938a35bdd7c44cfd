#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmis/engine.hpp"

namespace rmis {

struct OutputOptions {
  std::string format = "json-lines";  // or "csv"
  bool trace = false;
  std::string path = "-";             // "-" is stdout

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

// Experiment description shared by the config file and the command line.
struct ExperimentConfig {
  std::string graph = "cycle:16";  // family ("cycle:16", "random_regular:128:3", ...) or edge-list path
  std::uint64_t graph_seed = 0;
  Protocol protocol = Protocol::Rps;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  std::uint64_t round_cap = 0;     // 0: protocol default
  double rank_bits_c = 3.0;
  std::uint32_t rank_bits = 0;     // 0: derived from rank_bits_c
  std::vector<double> v;           // empty: 1 for every node
  std::optional<DeviationSpec> deviation;
  SignatureBackend signatures = SignatureBackend::Ideal;
  std::size_t garbage_bytes = 8;
  OutputOptions output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Unknown keys and ill-typed values throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config_file(const std::string& path);

bool is_family_text(const std::string& graph);
std::shared_ptr<const Graph> build_graph(const ExperimentConfig& c);
RunConfig make_run_config(const ExperimentConfig& c, std::shared_ptr<const Graph> graph);

}  // namespace rmis
