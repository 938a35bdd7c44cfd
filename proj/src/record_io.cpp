#include "rmis/record_io.hpp"

#include <ostream>

#include "rmis/errors.hpp"

namespace rmis {

using nlohmann::json;

namespace {

json output_json(const std::optional<OutputValue>& o) {
  if (!o) return nullptr;
  return std::string(to_string(*o));
}

std::optional<OutputValue> output_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  const auto s = j.get<std::string>();
  if (s == "0") return OutputValue::Zero;
  if (s == "1") return OutputValue::One;
  if (s == "bot") return OutputValue::Bot;
  throw FormatError("bad output value '" + s + "'");
}

json utility_json(const UtilityValue& u) {
  if (u.is_negative_infinity()) return "-inf";
  return u.value();
}

UtilityValue utility_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "-inf") throw FormatError("bad utility");
    return UtilityValue::negative_infinity();
  }
  return UtilityValue::finite(j.get<double>());
}

json payload_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RpsMovePayload>) {
          static constexpr const char* names[] = {"r", "p", "s"};
          return {{"type", "rps_move"}, {"move", names[static_cast<int>(v.move)]}};
        } else if constexpr (std::is_same_v<T, OpponentChoice>) {
          return {{"type", "opponent"}, {"opponent", v.opponent}};
        } else if constexpr (std::is_same_v<T, SelfRand>) {
          return {{"type", "self_rand"}, {"bits", v.bits.value}, {"length", v.bits.length}};
        } else if constexpr (std::is_same_v<T, PairRand>) {
          return {{"type", "pair_rand"}, {"iteration", v.iteration}, {"from", v.from}, {"to", v.to},
                  {"bits", v.bits.value}, {"length", v.bits.length}};
        } else if constexpr (std::is_same_v<T, ForwardedPairRand>) {
          return {{"type", "forwarded_pair_rand"}, {"iteration", v.iteration}, {"opponent", v.opponent},
                  {"bits", v.bits.value}, {"length", v.bits.length}};
        } else {
          return {{"type", "garbage"}, {"size", v.bytes.size()}};
        }
      },
      p);
}

}  // namespace

json record_to_json(const RunRecord& rec) {
  json j;
  j["seed"] = rec.seed;
  j["protocol"] = std::string(to_string(rec.protocol));
  j["terminated"] = rec.terminated;
  j["rounds_used"] = rec.rounds_used;
  j["iterations_used"] = rec.iterations_used;
  json outs = json::array();
  for (const auto& o : rec.outputs) outs.push_back(output_json(o));
  j["outputs"] = std::move(outs);
  json decided = json::array();
  for (const auto& r : rec.decided_round) decided.push_back(r ? json(*r) : json(nullptr));
  j["decided_round"] = std::move(decided);
  json utils = json::array();
  for (const auto& u : rec.utilities) utils.push_back(utility_json(u));
  j["utilities"] = std::move(utils);
  json cheat = json::array();
  for (char c : rec.cheat_flags) cheat.push_back(c != 0);
  j["cheat_flags"] = std::move(cheat);
  if (!rec.deviations.empty()) {
    json devs = json::array();
    for (const auto& d : rec.deviations) {
      devs.push_back({{"spec", format_deviation(d.spec)},
                      {"fired", d.fired},
                      {"fired_round", d.fired_round ? json(*d.fired_round) : json(nullptr)},
                      {"detected", d.detected}});
    }
    j["deviations"] = std::move(devs);
  }
  if (rec.trace) {
    json tr = json::array();
    for (const auto& e : *rec.trace) {
      json msgs = json::array();
      for (const Message& m : e.action.outbound) {
        msgs.push_back({{"to", m.to ? json(*m.to) : json("all")}, {"payload", payload_json(m.payload)}});
      }
      tr.push_back({{"round", e.round}, {"node", e.node}, {"output", output_json(e.action.output)},
                    {"messages", std::move(msgs)}});
    }
    j["trace"] = std::move(tr);
  }
  return j;
}

RunRecord record_from_json(const json& j) {
  try {
    RunRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.protocol = parse_protocol(j.at("protocol").get<std::string>());
    rec.terminated = j.at("terminated").get<bool>();
    rec.rounds_used = j.at("rounds_used").get<std::uint64_t>();
    rec.iterations_used = j.at("iterations_used").get<std::uint64_t>();
    for (const auto& o : j.at("outputs")) rec.outputs.push_back(output_from(o));
    for (const auto& r : j.at("decided_round")) {
      rec.decided_round.push_back(r.is_null() ? std::nullopt : std::optional(r.get<std::uint64_t>()));
    }
    for (const auto& u : j.at("utilities")) rec.utilities.push_back(utility_from(u));
    for (const auto& c : j.at("cheat_flags")) rec.cheat_flags.push_back(c.get<bool>() ? 1 : 0);
    if (j.contains("deviations")) {
      for (const auto& d : j.at("deviations")) {
        DeviationOutcome out;
        out.spec = parse_deviation(d.at("spec").get<std::string>());
        out.fired = d.at("fired").get<bool>();
        if (!d.at("fired_round").is_null()) out.fired_round = d.at("fired_round").get<std::uint64_t>();
        out.detected = d.at("detected").get<bool>();
        rec.deviations.push_back(std::move(out));
      }
    }
    return rec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad run record: ") + e.what());
  }
}

void write_json_line(std::ostream& os, const RunRecord& rec) { os << record_to_json(rec).dump() << '\n'; }

std::string run_csv_header() {
  return "seed,protocol,terminated,rounds_used,iterations_used,ones,zeros,bots,undecided,neg_inf,cheated,"
         "deviator,deviator_output,deviator_utility,fired,detected";
}

void write_csv_row(std::ostream& os, const RunRecord& rec) {
  std::size_t ones = 0, zeros = 0, bots = 0, undecided = 0, neg_inf = 0, cheated = 0;
  for (const auto& o : rec.outputs) {
    if (!o) ++undecided;
    else if (*o == OutputValue::One) ++ones;
    else if (*o == OutputValue::Zero) ++zeros;
    else ++bots;
  }
  for (const auto& u : rec.utilities) neg_inf += u.is_negative_infinity() ? 1 : 0;
  for (char c : rec.cheat_flags) cheated += c ? 1 : 0;
  os << rec.seed << ',' << to_string(rec.protocol) << ',' << (rec.terminated ? 1 : 0) << ','
     << rec.rounds_used << ',' << rec.iterations_used << ',' << ones << ',' << zeros << ',' << bots << ','
     << undecided << ',' << neg_inf << ',' << cheated << ',';
  if (rec.deviations.empty()) {
    os << ",,,,\n";
    return;
  }
  const auto& d = rec.deviations.front();
  const NodeId node = d.spec.node;
  const auto& u = rec.utilities[node];
  os << node << ',' << (rec.outputs[node] ? std::string(to_string(*rec.outputs[node])) : std::string()) << ','
     << (u.is_negative_infinity() ? std::string("-inf") : std::to_string(u.value())) << ','
     << (d.fired ? 1 : 0) << ',' << (d.detected ? 1 : 0) << '\n';
}

}  // namespace rmis
