#pragma once

// File formats: canonical model JSON, event-log and panel CSV, CCP tables,
// identification reports, anchors, and run manifests. Numbers are written
// with shortest round-trip formatting so identical runs produce identical
// bytes; no output carries a timestamp.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "peernet/ctmc.hpp"
#include "peernet/identify.hpp"
#include "peernet/model.hpp"
#include "peernet/recovery.hpp"

namespace peernet {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write file: " + path);
  out << text;
  require_state(static_cast<bool>(out), "write failed: " + path);
}

inline std::uint64_t hash_file(const std::string& path) {
  const auto text = read_text_file(path);
  return fnv1a64(text.data(), text.size());
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

// Comma-separated, header mandatory, no quoting (fields never contain commas).
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  const auto text = read_text_file(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    rows.push_back(std::move(fields));
  }
  require(!rows.empty(), "empty CSV: " + path);
  return rows;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    require(used == s.size(), "trailing characters in " + what + ": '" + s + "'");
    return x;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("cannot parse " + what + ": '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, const std::string& what) {
  long long value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  require(res.ec == std::errc{} && res.ptr == s.data() + s.size(),
          "cannot parse " + what + ": '" + s + "'");
  return value;
}

// --------------------------------------------------------------------------
// Model JSON
// --------------------------------------------------------------------------

inline ordered_json model_to_json(const ModelSpec& m) {
  const int A = m.net.n_agents();
  ordered_json j;
  j["menu_size"] = m.menu_max;
  j["agents"] = A;
  j["lambda"] = m.lambda;
  j["nc"] = m.net.nc;
  j["nr"] = m.net.nr;
  ordered_json q = ordered_json::array();
  for (int a = 0; a < A; ++a) q.push_back(m.q[a]);
  j["q"] = q;
  ordered_json r = ordered_json::array();
  for (int a = 0; a < A; ++a) {
    // Records sorted by consideration set then count vector for canonical bytes.
    std::vector<std::pair<std::vector<int>, std::pair<std::vector<int>, std::vector<double>>>>
        records;
    for (const auto& [mask, rows] : m.r[a].rows) {
      const auto alts = menu_alternatives(mask, m.menu_max);
      for (const auto& [key, dist] : rows) records.push_back({alts, {key, dist}});
    }
    std::sort(records.begin(), records.end());
    ordered_json agent_records = ordered_json::array();
    for (const auto& rec : records) {
      ordered_json o;
      o["consideration_set"] = rec.first;
      o["nr_counts"] = rec.second.first;
      o["distribution"] = rec.second.second;
      agent_records.push_back(std::move(o));
    }
    r.push_back(std::move(agent_records));
  }
  j["r"] = r;
  return j;
}

inline ModelSpec model_from_json(const ordered_json& j) {
  ModelSpec m;
  m.menu_max = j.at("menu_size").get<int>();
  const int A = j.at("agents").get<int>();
  m.lambda = j.at("lambda").get<std::vector<double>>();
  m.net.nc = j.at("nc").get<std::vector<std::vector<int>>>();
  m.net.nr = j.at("nr").get<std::vector<std::vector<int>>>();
  m.q = j.at("q").get<std::vector<std::vector<std::vector<double>>>>();
  m.r.assign(A, {});
  const auto& r = j.at("r");
  require(static_cast<int>(r.size()) == A, "model JSON: r must list every agent");
  for (int a = 0; a < A; ++a) {
    for (const auto& rec : r[a]) {
      const auto alts = rec.at("consideration_set").get<std::vector<int>>();
      std::uint32_t mask = 0;
      for (int v : alts) {
        require(v >= 0 && v <= m.menu_max, "model JSON: consideration_set alternative range");
        mask |= std::uint32_t{1} << v;
      }
      require(mask & 1u, "model JSON: consideration_set must contain the default");
      const auto key = rec.at("nr_counts").get<std::vector<int>>();
      const auto dist = rec.at("distribution").get<std::vector<double>>();
      m.r[a].rows[mask][key] = dist;
    }
  }
  check_model_structure(m);
  return m;
}

inline std::string model_canonical_text(const ModelSpec& m) { return model_to_json(m).dump(); }

inline std::string model_hash(const ModelSpec& m) {
  const auto text = model_canonical_text(m);
  return hex64(fnv1a64(text.data(), text.size()));
}

inline void save_model(const ModelSpec& m, const std::string& path) {
  write_text_file(path, model_to_json(m).dump(2) + "\n");
}

inline ModelSpec load_model(const std::string& path) {
  return model_from_json(ordered_json::parse(read_text_file(path)));
}

// --------------------------------------------------------------------------
// Event logs and panels
// --------------------------------------------------------------------------

inline void save_event_log(const EventLog& log, const std::string& csv_path,
                           const std::string& sidecar_path) {
  std::ostringstream os;
  os << "time,agent,choice\n";
  for (const auto& e : log.events)
    os << format_double(e.time) << "," << e.agent << "," << e.choice << "\n";
  write_text_file(csv_path, os.str());
  ordered_json j;
  j["initial_config"] = log.initial;
  j["horizon"] = log.horizon;
  j["seed"] = log.seed;
  j["model_hash"] = log.model_hash;
  write_text_file(sidecar_path, j.dump(2) + "\n");
}

inline EventLog load_event_log(const std::string& csv_path, const std::string& sidecar_path,
                               int menu_max) {
  EventLog log;
  const auto j = ordered_json::parse(read_text_file(sidecar_path));
  log.initial = j.at("initial_config").get<Config>();
  log.horizon = j.at("horizon").get<double>();
  log.seed = j.at("seed").get<std::uint64_t>();
  log.model_hash = j.at("model_hash").get<std::string>();
  log.n_agents = static_cast<int>(log.initial.size());
  log.menu_max = menu_max;
  const auto rows = read_csv(csv_path);
  require(rows[0] == std::vector<std::string>({"time", "agent", "choice"}),
          "event CSV: unexpected header");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    require(rows[i].size() == 3, "event CSV: row width");
    EventRecord e;
    e.time = parse_double(rows[i][0], "event time");
    e.agent = static_cast<int>(parse_int(rows[i][1], "event agent"));
    e.choice = static_cast<int>(parse_int(rows[i][2], "event choice"));
    require(e.agent >= 0 && e.agent < log.n_agents, "event CSV: agent out of range");
    require(e.choice >= 0 && e.choice <= menu_max, "event CSV: choice out of range");
    log.events.push_back(e);
  }
  return log;
}

inline void save_panel(const Panel& panel, const std::string& path) {
  std::ostringstream os;
  os << "t";
  for (int a = 0; a < panel.n_agents; ++a) os << ",y_" << a;
  os << "\n";
  for (std::size_t k = 0; k < panel.states.size(); ++k) {
    os << format_double(static_cast<double>(k) * panel.delta);
    for (int a = 0; a < panel.n_agents; ++a) os << "," << panel.states[k][a];
    os << "\n";
  }
  write_text_file(path, os.str());
}

inline Panel load_panel(const std::string& path, int menu_max) {
  const auto rows = read_csv(path);
  Panel panel;
  require(rows[0].size() >= 2 && rows[0][0] == "t", "panel CSV: unexpected header");
  panel.n_agents = static_cast<int>(rows[0].size()) - 1;
  panel.menu_max = menu_max;
  require(rows.size() >= 3, "panel CSV: need at least two epochs");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    require(rows[i].size() == rows[0].size(), "panel CSV: row width");
    Config y(panel.n_agents);
    for (int a = 0; a < panel.n_agents; ++a) {
      y[a] = static_cast<int>(parse_int(rows[i][a + 1], "panel state"));
      require(y[a] >= 0 && y[a] <= menu_max, "panel CSV: state out of range");
    }
    panel.states.push_back(std::move(y));
  }
  panel.delta = parse_double(rows[2][0], "panel time") - parse_double(rows[1][0], "panel time");
  require(panel.delta > 0, "panel CSV: nonincreasing times");
  return panel;
}

// --------------------------------------------------------------------------
// CCP tables
// --------------------------------------------------------------------------

inline void save_ccp_table(const CcpTable& ccp, const std::string& csv_path,
                           const std::string& diagnostics_path,
                           const ordered_json& diagnostics) {
  std::ostringstream os;
  os << "agent,config_index,alt,prob\n";
  for (int a = 0; a < ccp.n_agents; ++a)
    for (std::int64_t s = 0; s < ccp.n_states(); ++s) {
      if (!ccp.has(a, s)) continue;
      for (int v = 0; v <= ccp.menu_max; ++v)
        os << a << "," << s << "," << v << "," << format_double(ccp.p[a](s, v)) << "\n";
    }
  write_text_file(csv_path, os.str());
  ordered_json j = diagnostics;
  j["agents"] = ccp.n_agents;
  j["menu_size"] = ccp.menu_max;
  ordered_json counts = ordered_json::array();
  for (int a = 0; a < ccp.n_agents; ++a) {
    ordered_json per_agent = ordered_json::array();
    for (std::int64_t s = 0; s < ccp.n_states(); ++s) per_agent.push_back(ccp.row_count(a, s));
    counts.push_back(std::move(per_agent));
  }
  j["row_counts"] = counts;
  write_text_file(diagnostics_path, j.dump(2) + "\n");
}

inline CcpTable load_ccp_table(const std::string& csv_path,
                               const std::string& diagnostics_path) {
  const auto j = ordered_json::parse(read_text_file(diagnostics_path));
  CcpTable ccp;
  ccp.n_agents = j.at("agents").get<int>();
  ccp.menu_max = j.at("menu_size").get<int>();
  const auto S = ccp.n_states();
  ccp.p.assign(ccp.n_agents, Eigen::MatrixXd::Zero(S, ccp.menu_max + 1));
  ccp.row_count = Eigen::MatrixXi::Zero(ccp.n_agents, S);
  const auto& counts = j.at("row_counts");
  require(static_cast<int>(counts.size()) == ccp.n_agents, "diagnostics: row_counts agents");
  for (int a = 0; a < ccp.n_agents; ++a) {
    require(static_cast<std::int64_t>(counts[a].size()) == S, "diagnostics: row_counts states");
    for (std::int64_t s = 0; s < S; ++s) ccp.row_count(a, s) = counts[a][s].get<int>();
  }
  const auto rows = read_csv(csv_path);
  require(rows[0] == std::vector<std::string>({"agent", "config_index", "alt", "prob"}),
          "CCP CSV: unexpected header");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    require(rows[i].size() == 4, "CCP CSV: row width");
    const int a = static_cast<int>(parse_int(rows[i][0], "ccp agent"));
    const auto s = parse_int(rows[i][1], "ccp config index");
    const int v = static_cast<int>(parse_int(rows[i][2], "ccp alt"));
    require(a >= 0 && a < ccp.n_agents && s >= 0 && s < S && v >= 0 && v <= ccp.menu_max,
            "CCP CSV: index out of range");
    ccp.p[a](s, v) = parse_double(rows[i][3], "ccp prob");
  }
  return ccp;
}

// --------------------------------------------------------------------------
// Anchors and identification reports
// --------------------------------------------------------------------------

inline std::vector<Anchor> load_anchors(const std::string& path) {
  const auto j = ordered_json::parse(read_text_file(path));
  std::vector<Anchor> anchors;
  for (const auto& rec : j.at("anchors")) {
    Anchor a;
    a.agent = rec.at("agent").get<int>();
    a.alternative = rec.at("alternative").get<int>();
    const auto kind = rec.at("kind").get<std::string>();
    require(kind == "consideration" || kind == "choice", "anchor kind must be consideration|choice");
    a.kind = kind == "consideration" ? Anchor::Kind::consideration : Anchor::Kind::choice;
    a.count = rec.at("count").get<int>();
    a.value = rec.at("value").get<double>();
    anchors.push_back(a);
  }
  return anchors;
}

inline ordered_json anchors_to_json(const std::vector<Anchor>& anchors) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : anchors) {
    ordered_json o;
    o["agent"] = a.agent;
    o["alternative"] = a.alternative;
    o["kind"] = a.kind == Anchor::Kind::consideration ? "consideration" : "choice";
    o["count"] = a.count;
    o["value"] = a.value;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline ordered_json identification_to_json(const IdentificationResult& res,
                                           const std::vector<Anchor>& anchors) {
  ordered_json j;
  j["agents"] = res.n_agents;
  j["menu_size"] = res.menu_max;
  ordered_json network;
  ordered_json nc = ordered_json::array(), nr = ordered_json::array();
  ordered_json status = ordered_json::array(), resolved = ordered_json::array();
  ordered_json peers = ordered_json::array();
  for (const auto& ident : res.agents) {
    peers.push_back(ident.peers);
    nc.push_back(ident.resolved ? ordered_json(ident.nc) : ordered_json(nullptr));
    nr.push_back(ident.resolved ? ordered_json(ident.nr) : ordered_json(nullptr));
    resolved.push_back(ident.resolved);
    status.push_back(ident.status);
  }
  network["peers"] = peers;
  network["nc"] = nc;
  network["nr"] = nr;
  network["resolved"] = resolved;
  network["status"] = status;
  j["network"] = network;
  ordered_json ratios = ordered_json::array();
  for (int a = 0; a < res.n_agents; ++a) {
    ordered_json per_agent = ordered_json::array();
    for (const auto& per_v : res.q_ratios.ratio[a]) {
      ordered_json rung = ordered_json::array();
      for (double r : per_v) rung.push_back(std::isfinite(r) ? ordered_json(r) : ordered_json(nullptr));
      per_agent.push_back(std::move(rung));
    }
    ratios.push_back(std::move(per_agent));
  }
  j["q_ratios"] = ratios;
  j["anchors"] = anchors_to_json(anchors);
  if (res.tables_complete)
    j["identified_model"] = model_to_json(res.identified);
  else
    j["identified_model"] = nullptr;
  return j;
}

inline std::string evidence_to_jsonl(const EvidenceLog& log) {
  std::ostringstream os;
  for (const auto& rec : log.records) {
    ordered_json j;
    j["agent"] = rec.agent;
    j["test"] = rec.test;
    j["configs"] = rec.detail;
    j["statistic"] = rec.statistic;
    j["threshold"] = rec.cutoff;
    j["verdict"] = rec.verdict;
    os << j.dump() << "\n";
  }
  return os.str();
}

// --------------------------------------------------------------------------
// Run manifests
// --------------------------------------------------------------------------

// Everything result-relevant, nothing time-dependent: identical runs must
// produce identical manifests.
struct RunManifest {
  std::string command;
  std::string version = "0.1.0";
  std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
  std::vector<std::string> outputs;
  ordered_json parameters = ordered_json::object();

  void add_input(const std::string& path) { inputs.push_back({path, hex64(hash_file(path))}); }

  ordered_json to_json() const {
    ordered_json j;
    j["command"] = command;
    j["version"] = version;
    ordered_json in = ordered_json::array();
    for (const auto& [path, hash] : inputs) {
      ordered_json o;
      o["path"] = path;
      o["hash"] = hash;
      in.push_back(std::move(o));
    }
    j["inputs"] = in;
    j["outputs"] = outputs;
    j["parameters"] = parameters;
    return j;
  }

  void save(const std::string& path) const { write_text_file(path, to_json().dump(2) + "\n"); }
};

}  // namespace peernet
