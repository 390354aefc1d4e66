// Batch front end for the pipeline: generate/validate tabular models, simulate
// event data, recover CCPs, identify networks, fit the opening model, and run
// counterfactual scenarios. Every command writes its artifacts plus a
// run_manifest.json into --out. Outputs carry no timestamps; identical inputs
// and seeds must reproduce identical bytes.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "peernet/counterfactual.hpp"
#include "peernet/ctmc.hpp"
#include "peernet/estimation.hpp"
#include "peernet/generate.hpp"
#include "peernet/identify.hpp"
#include "peernet/io.hpp"
#include "peernet/model.hpp"
#include "peernet/recovery.hpp"
#include "peernet/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct SharedFlags {
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = 1;
  std::int64_t state_cap = peernet::kDefaultStateCap;
};

void add_shared(CLI::App* cmd, SharedFlags& shared) {
  cmd->add_option("--seed", shared.seed, "Seed for anything stochastic in this command");
  cmd->add_option("--out", shared.out, "Output directory (created if missing)");
  cmd->add_option("--threads", shared.threads,
                  "Cap on internal parallelism (current modules run serially)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--state-cap", shared.state_cap, "Refuse state spaces larger than this")
      ->check(CLI::PositiveNumber);
}

// Missing inputs are a usage problem, not a stage failure: exit code 2.
void check_inputs(const std::vector<std::string>& paths) {
  for (const auto& p : paths)
    if (!p.empty() && !fs::exists(p)) {
      std::cerr << "missing input: " << p << "\n";
      std::exit(2);
    }
}

std::string out_file(const SharedFlags& shared, const std::string& name) {
  fs::create_directories(shared.out);
  return (fs::path(shared.out) / name).string();
}

ordered_json shared_params(const SharedFlags& shared) {
  ordered_json j;
  j["seed"] = shared.seed;
  j["threads"] = shared.threads;
  j["state_cap"] = shared.state_cap;
  return j;
}

void save_manifest(const SharedFlags& shared, const std::string& command,
                   const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                   ordered_json parameters) {
  peernet::RunManifest man;
  man.command = command;
  for (const auto& p : inputs)
    if (!p.empty()) man.add_input(p);
  man.outputs = outputs;
  man.parameters = std::move(parameters);
  man.save(out_file(shared, "run_manifest.json"));
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  SharedFlags shared;
  int agents = 3;
  int menu = 2;
  int attempts = 200;
};

int cmd_generate(const GenerateArgs& a) {
  long double states = 1;
  for (int i = 0; i < a.agents; ++i) states *= a.menu + 1;
  if (states > static_cast<long double>(a.shared.state_cap))
    throw std::invalid_argument("state space (" + std::to_string(a.menu + 1) + "^" +
                                std::to_string(a.agents) + ") exceeds --state-cap");
  peernet::GeneratorOptions opt;
  opt.n_agents = a.agents;
  opt.menu_max = a.menu;
  opt.max_attempts = a.attempts;
  const auto model = peernet::random_model(opt, a.shared.seed);
  const auto report = peernet::validate_assumptions(model);
  if (!report.all_pass()) throw std::runtime_error("generated model failed its own validation");
  peernet::save_model(model, out_file(a.shared, "model.json"));

  ordered_json params = shared_params(a.shared);
  params["agents"] = a.agents;
  params["menu"] = a.menu;
  params["attempts"] = a.attempts;
  params["model_hash"] = peernet::model_hash(model);
  save_manifest(a.shared, "generate", {}, {"model.json"}, std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  SharedFlags shared;
  std::string model_path;
};

int cmd_validate(const ValidateArgs& a) {
  check_inputs({a.model_path});
  const auto model = peernet::load_model(a.model_path);
  const auto report = peernet::validate_assumptions(model);
  ordered_json j;
  j["all_pass"] = report.all_pass();
  ordered_json clauses = ordered_json::array();
  for (const auto& c : report.clauses) {
    ordered_json o;
    o["clause"] = c.clause;
    o["agent"] = c.agent;
    o["status"] = c.status;
    o["detail"] = c.detail;
    clauses.push_back(std::move(o));
  }
  j["clauses"] = std::move(clauses);
  j["notes"] = report.notes;
  peernet::write_text_file(out_file(a.shared, "validation.json"), j.dump(2) + "\n");

  ordered_json params = shared_params(a.shared);
  params["model_hash"] = peernet::model_hash(model);
  save_manifest(a.shared, "validate", {a.model_path}, {"validation.json"}, std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  SharedFlags shared;
  std::string model_path;
  double horizon = 0.0;
  double delta = 0.0;  // optional panel sampling interval
  std::vector<int> initial;
};

int cmd_simulate(const SimulateArgs& a) {
  check_inputs({a.model_path});
  const auto model = peernet::load_model(a.model_path);
  peernet::Config initial(static_cast<std::size_t>(model.n_agents()), 0);
  if (!a.initial.empty()) {
    if (static_cast<int>(a.initial.size()) != model.n_agents())
      throw std::invalid_argument("--initial needs one entry per agent");
    initial.assign(a.initial.begin(), a.initial.end());
  }
  auto log = peernet::simulate_trajectory(model, initial, a.horizon, a.shared.seed);
  log.model_hash = peernet::model_hash(model);
  peernet::save_event_log(log, out_file(a.shared, "events.csv"),
                          out_file(a.shared, "events_meta.json"));
  std::vector<std::string> outputs{"events.csv", "events_meta.json"};
  if (a.delta > 0.0) {
    const auto panel = peernet::sample_at_intervals(log, a.delta);
    peernet::save_panel(panel, out_file(a.shared, "panel.csv"));
    outputs.push_back("panel.csv");
  }

  ordered_json params = shared_params(a.shared);
  params["horizon"] = a.horizon;
  params["delta"] = a.delta;
  params["initial"] = initial;
  params["events"] = log.events.size();
  save_manifest(a.shared, "simulate", {a.model_path}, outputs, std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// recover-ccp

struct RecoverArgs {
  SharedFlags shared;
  std::string events_path;
  std::string meta_path;
  std::string panel_path;
  int menu = 0;
};

int cmd_recover(const RecoverArgs& a) {
  const bool from_events = !a.events_path.empty();
  const bool from_panel = !a.panel_path.empty();
  if (from_events == from_panel)
    throw std::invalid_argument("pass either --events with --meta or --panel, not both");
  std::vector<std::string> outputs;
  ordered_json params = shared_params(a.shared);
  params["menu"] = a.menu;

  if (from_events) {
    check_inputs({a.events_path, a.meta_path});
    const auto log = peernet::load_event_log(a.events_path, a.meta_path, a.menu);
    const auto rec = peernet::ccp_from_events(log, a.shared.state_cap);
    ordered_json diag;
    diag["lambda_hat"] = rec.lambda_hat;
    diag["events"] = rec.diag.n_events;
    diag["events_per_agent"] = rec.diag.events_per_agent;
    diag["visited_rows"] = rec.diag.visited_rows;
    diag["total_rows"] = rec.diag.total_rows;
    peernet::save_ccp_table(rec.ccp, out_file(a.shared, "ccp.csv"),
                            out_file(a.shared, "ccp_diagnostics.json"), diag);
    outputs = {"ccp.csv", "ccp_diagnostics.json"};
    save_manifest(a.shared, "recover-ccp", {a.events_path, a.meta_path}, outputs,
                  std::move(params));
    return 0;
  }

  check_inputs({a.panel_path});
  const auto panel = peernet::load_panel(a.panel_path, a.menu);
  const auto est = peernet::estimate_transition_matrix(panel, a.shared.state_cap);
  const auto rec = peernet::generator_from_panel(est.p, panel.delta);
  ordered_json diag;
  diag["ok"] = rec.ok;
  diag["reason"] = rec.reason;
  diag["aliasing_suspected"] = rec.aliasing_suspected;
  diag["distinctness_margin"] = rec.distinctness_margin;
  diag["branch_cut_margin"] = rec.branch_cut_margin;
  diag["imaginary_residual"] = rec.imaginary_residual;
  diag["off_pattern_norm"] = rec.off_pattern_norm;
  diag["negative_rate_clip"] = rec.negative_rate_clip;
  diag["delta"] = panel.delta;
  diag["unvisited_states"] = est.unvisited.size();
  if (!rec.ok) {
    peernet::write_text_file(out_file(a.shared, "generator_diagnostics.json"),
                             diag.dump(2) + "\n");
    save_manifest(a.shared, "recover-ccp", {a.panel_path}, {"generator_diagnostics.json"},
                  std::move(params));
    throw std::runtime_error(rec.reason);
  }

  std::ostringstream os;
  os << "row,col,rate\n";
  for (Eigen::Index i = 0; i < rec.generator.rows(); ++i)
    for (Eigen::Index j = 0; j < rec.generator.cols(); ++j)
      os << i << "," << j << "," << peernet::format_double(rec.generator(i, j)) << "\n";
  peernet::write_text_file(out_file(a.shared, "generator.csv"), os.str());
  outputs = {"generator.csv", "generator_diagnostics.json"};

  // The decomposition into alarm rates and CCPs needs a matrix of the exact
  // model class; on sampled panels it can legitimately fail, which the
  // diagnostics record without failing the recovery itself.
  try {
    peernet::RateMatrix rm;
    rm.n_agents = panel.n_agents;
    rm.menu_max = a.menu;
    rm.m = rec.generator;
    const auto dec = peernet::decompose_rate_matrix(rm, 1e-6);
    diag["lambda_hat"] = dec.lambda;
    diag["rate_residual"] = dec.rate_residual;
    ordered_json ccp_diag;
    ccp_diag["source"] = "panel";
    peernet::save_ccp_table(dec.ccp, out_file(a.shared, "ccp.csv"),
                            out_file(a.shared, "ccp_diagnostics.json"), ccp_diag);
    outputs.push_back("ccp.csv");
    outputs.push_back("ccp_diagnostics.json");
  } catch (const std::exception& e) {
    diag["decomposition_error"] = e.what();
  }
  peernet::write_text_file(out_file(a.shared, "generator_diagnostics.json"), diag.dump(2) + "\n");
  save_manifest(a.shared, "recover-ccp", {a.panel_path}, outputs, std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// identify

struct IdentifyArgs {
  SharedFlags shared;
  std::string ccp_path;
  std::string diagnostics_path;
  std::string mode = "exact";
  double threshold = -1.0;  // zero_tol in exact mode, SE multiplier otherwise
  std::string anchor_path;
  std::string known_side = "none";
  std::string known_sets_path;
};

int cmd_identify(const IdentifyArgs& a) {
  check_inputs({a.ccp_path, a.diagnostics_path, a.anchor_path, a.known_sets_path});
  const auto ccp = peernet::load_ccp_table(a.ccp_path, a.diagnostics_path);

  peernet::PipelineOptions opt;
  if (a.mode == "exact") {
    opt.policy.mode = peernet::TestPolicy::Mode::exact;
    if (a.threshold > 0.0) opt.policy.zero_tol = a.threshold;
  } else if (a.mode == "statistical") {
    opt.policy.mode = peernet::TestPolicy::Mode::statistical;
    if (a.threshold > 0.0) opt.policy.se_multiplier = a.threshold;
  } else {
    throw std::invalid_argument("--mode must be exact or statistical");
  }
  if (!a.anchor_path.empty()) opt.anchors = peernet::load_anchors(a.anchor_path);
  if (a.known_side == "consideration")
    opt.known_side = peernet::KnownSide::consideration;
  else if (a.known_side == "preference")
    opt.known_side = peernet::KnownSide::preference;
  else if (a.known_side != "none")
    throw std::invalid_argument("--known-side must be none, consideration, or preference");
  if (!a.known_sets_path.empty())
    opt.known_sets = ordered_json::parse(peernet::read_text_file(a.known_sets_path))
                         .get<std::vector<std::vector<int>>>();

  const auto res = peernet::identify_pipeline(ccp, opt);
  peernet::write_text_file(out_file(a.shared, "identification.json"),
                           peernet::identification_to_json(res, opt.anchors).dump(2) + "\n");
  peernet::write_text_file(out_file(a.shared, "evidence.jsonl"),
                           peernet::evidence_to_jsonl(res.evidence));

  ordered_json params = shared_params(a.shared);
  params["mode"] = a.mode;
  params["threshold"] = a.threshold;
  params["known_side"] = a.known_side;
  params["structure_complete"] = res.structure_complete;
  params["tables_complete"] = res.tables_complete;
  save_manifest(a.shared, "identify",
                {a.ccp_path, a.diagnostics_path, a.anchor_path, a.known_sets_path},
                {"identification.json", "evidence.jsonl"}, std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  SharedFlags shared;
  std::string openings_path;
  std::string markets_path;
  std::string geography_path;
  std::string borders_path;
  int k_nearest = 5;
  bool full_consideration = false;
  bool search = false;
  bool tie_firms = false;
  int starts = 2;
  int max_iterations = 2000;
};

int cmd_fit(const FitArgs& a) {
  check_inputs({a.openings_path, a.markets_path, a.geography_path, a.borders_path});
  peernet::PanelFiles files{a.openings_path, a.markets_path, a.geography_path, a.borders_path};
  const auto panel = peernet::load_firm_panel(files);
  const auto layout = peernet::layout_for(panel);

  peernet::ConsiderationNetwork candidate;
  candidate.n_firms = panel.n_firms;
  candidate.n_markets = panel.n_markets;
  if (!panel.geography.empty())
    candidate = peernet::build_neighborhood_network(panel.geography, panel.n_firms, a.k_nearest);

  peernet::MaximizeOptions mo;
  mo.max_iterations = a.max_iterations;
  mo.n_starts = a.starts;
  mo.start_seed = a.shared.seed;
  mo.full_consideration = a.full_consideration;
  const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(layout.dim());

  peernet::ConsiderationNetwork net = candidate;
  Eigen::VectorXd theta;
  double value = 0.0;
  bool converged = false, degenerate = false;
  int iterations = 0;
  std::vector<std::string> outputs{"model_fit.json", "theta.json", "network.json"};
  if (a.search) {
    peernet::GreedySearchOptions go;
    go.fit = mo;
    go.tie_firms = a.tie_firms;
    const auto res = peernet::greedy_network_search(panel, candidate, theta0, go);
    net = res.network;
    theta = res.theta;
    value = res.value;
    degenerate = res.degenerate;
    converged = !res.degenerate;
    std::ostringstream trace;
    peernet::write_search_trace(trace, res, panel.firm_names, panel.market_names);
    peernet::write_text_file(out_file(a.shared, "search_trace.jsonl"), trace.str());
    outputs.push_back("search_trace.jsonl");
  } else {
    const auto res = peernet::maximize_likelihood(panel, net, theta0, mo);
    theta = res.theta;
    value = res.value;
    converged = res.converged;
    degenerate = res.degenerate;
    iterations = res.iterations;
  }

  const auto names = peernet::theta_names(layout, panel.firm_names, panel.covariate_names);
  peernet::StandardErrorResult se;
  if (!degenerate) {
    peernet::StandardErrorOptions so;
    so.full_consideration = a.full_consideration;
    se = peernet::standard_errors(panel, net, theta, so);
  }
  const Eigen::VectorXd* se_ptr = se.se.size() == theta.size() ? &se.se : nullptr;
  const auto theta_json = peernet::theta_to_json(layout, theta, names, se_ptr);
  const auto net_json = peernet::network_to_json(net, panel.firm_names, panel.market_names);
  peernet::write_text_file(out_file(a.shared, "theta.json"), theta_json.dump(2) + "\n");
  peernet::write_text_file(out_file(a.shared, "network.json"), net_json.dump(2) + "\n");

  ordered_json bundle;
  bundle["firms"] = panel.firm_names;
  bundle["markets"] = panel.market_names;
  bundle["covariates"] = panel.covariate_names;
  bundle["full_consideration"] = a.full_consideration;
  bundle["log_likelihood"] = value;
  bundle["converged"] = converged;
  bundle["degenerate"] = degenerate;
  bundle["iterations"] = iterations;
  bundle["events"] = panel.events.size();
  bundle["coefficients"] = theta_json.at("coefficients");
  if (se_ptr != nullptr) {
    bundle["standard_errors"] = theta_json.at("standard_errors");
    bundle["curvature_positive_definite"] = se.positive_definite;
  }
  bundle["network"] = net_json;
  peernet::write_text_file(out_file(a.shared, "model_fit.json"), bundle.dump(2) + "\n");

  ordered_json params = shared_params(a.shared);
  params["k_nearest"] = a.k_nearest;
  params["full_consideration"] = a.full_consideration;
  params["search"] = a.search;
  params["tie_firms"] = a.tie_firms;
  params["starts"] = a.starts;
  params["max_iterations"] = a.max_iterations;
  save_manifest(a.shared, "fit",
                {a.openings_path, a.markets_path, a.geography_path, a.borders_path}, outputs,
                std::move(params));
  return 0;
}

// ---------------------------------------------------------------------------
// counterfact

struct CounterfactArgs {
  SharedFlags shared;
  std::string fit_path;
  std::string scenario = "baseline";
  int horizon = 0;
  int replications = 100;
  std::string initial_path;
  std::string markets_path;
  int grid_step = 30;
  double duopoly_threshold = 0.44;
  double monopoly_threshold = 0.48;
};

int cmd_counterfact(const CounterfactArgs& a) {
  check_inputs({a.fit_path, a.initial_path, a.markets_path});
  const auto tag = peernet::parse_scenario(a.scenario);
  const auto bundle = ordered_json::parse(peernet::read_text_file(a.fit_path));
  const auto firms = bundle.at("firms").get<std::vector<std::string>>();
  const auto markets = bundle.at("markets").get<std::vector<std::string>>();
  const auto covariates = bundle.at("covariates").get<std::vector<std::string>>();
  const peernet::ThetaLayout layout{static_cast<int>(firms.size()),
                                    static_cast<int>(covariates.size()) + 1};
  std::map<std::string, int> firm_index, market_index;
  for (std::size_t i = 0; i < firms.size(); ++i) firm_index[firms[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < markets.size(); ++i) market_index[markets[i]] = static_cast<int>(i);

  const auto names = peernet::theta_names(layout, firms, covariates);
  const auto& coef = bundle.at("coefficients");
  Eigen::VectorXd theta(layout.dim());
  for (int i = 0; i < layout.dim(); ++i) {
    const auto& name = names[static_cast<std::size_t>(i)];
    if (!coef.contains(name))
      throw std::runtime_error("fit bundle lacks coefficient: " + name);
    theta[i] = coef.at(name).get<double>();
  }

  peernet::ConsiderationNetwork net;
  net.n_firms = layout.n_firms;
  net.n_markets = static_cast<int>(markets.size());
  auto resolve = [](const std::map<std::string, int>& index, const std::string& name,
                    const std::string& what) {
    const auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error("fit bundle names unknown " + what + ": " + name);
    return it->second;
  };
  for (const auto& link : bundle.at("network").at("links"))
    net.links.push_back(peernet::MarketLink{
        resolve(firm_index, link.at("firm").get<std::string>(), "firm"),
        resolve(market_index, link.at("market").get<std::string>(), "market"),
        resolve(firm_index, link.at("peer_firm").get<std::string>(), "firm"),
        resolve(market_index, link.at("peer_market").get<std::string>(), "market")});
  peernet::sort_links(net);

  auto initial = std::vector<std::vector<int>>(
      firms.size(), std::vector<int>(markets.size(), 0));
  if (!a.initial_path.empty()) {
    const auto table = peernet::read_csv_table(a.initial_path);
    const int c_firm = peernet::csv_column(table, a.initial_path, "firm");
    const int c_market = peernet::csv_column(table, a.initial_path, "market");
    const int c_count = peernet::csv_column(table, a.initial_path, "count");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      const auto where = a.initial_path + ":" + std::to_string(i + 2);
      const int f = resolve(firm_index, row[static_cast<std::size_t>(c_firm)], "firm");
      const int m = resolve(market_index, row[static_cast<std::size_t>(c_market)], "market");
      const long long n =
          peernet::parse_int(row[static_cast<std::size_t>(c_count)], "count at " + where);
      if (n < 0) throw std::runtime_error(where + ": negative store count");
      initial[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)] = static_cast<int>(n);
    }
  }

  // Covariates are frozen at the last dated row per market, matching the
  // frozen-path design; markets absent from the file are an error when the
  // fitted model uses covariates at all.
  std::vector<std::vector<peernet::CovariateSample>> cov(markets.size());
  if (!covariates.empty()) {
    if (a.markets_path.empty())
      throw std::invalid_argument("the fitted model uses covariates; pass --markets");
    const auto table = peernet::read_csv_table(a.markets_path);
    const int c_market = peernet::csv_column(table, a.markets_path, "market");
    const int c_date = peernet::csv_column(table, a.markets_path, "date");
    std::vector<int> cols;
    for (const auto& name : covariates) cols.push_back(peernet::csv_column(table, a.markets_path, name));
    std::vector<std::int64_t> last_day(markets.size(), std::numeric_limits<std::int64_t>::min());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      const auto where = a.markets_path + ":" + std::to_string(i + 2);
      const auto it = market_index.find(row[static_cast<std::size_t>(c_market)]);
      if (it == market_index.end()) continue;  // markets outside the fit are ignorable here
      const auto day = peernet::parse_iso_date(row[static_cast<std::size_t>(c_date)]);
      const auto m = static_cast<std::size_t>(it->second);
      if (day < last_day[m]) continue;
      last_day[m] = day;
      std::vector<double> values;
      for (int c : cols)
        values.push_back(
            peernet::parse_double(row[static_cast<std::size_t>(c)], "covariate at " + where));
      cov[m] = {peernet::CovariateSample{0.0, std::move(values)}};
    }
    for (std::size_t m = 0; m < markets.size(); ++m)
      if (cov[m].empty())
        throw std::runtime_error("market " + markets[m] + " has no covariate row in " +
                                 a.markets_path);
  }

  auto setup = peernet::apply_scenario(layout, theta, net, initial, tag);
  if (bundle.at("full_consideration").get<bool>()) setup.full_consideration = true;

  const auto paths =
      peernet::simulate_market_paths(setup, cov, static_cast<int>(covariates.size()), a.horizon,
                                     a.replications, a.shared.seed);
  // Sample half a day past each boundary so a day's batch of openings is
  // always wholly on one side of the grid point.
  std::vector<double> grid{0.0};
  for (int t = a.grid_step; t < a.horizon; t += a.grid_step) grid.push_back(t + 0.5);
  grid.push_back(a.horizon + 0.5);
  const auto stats = peernet::market_structure_stats(paths, setup.initial_counts, grid);

  std::ostringstream series;
  peernet::write_structure_series(series, stats, a.scenario);
  peernet::write_text_file(out_file(a.shared, "structure_series.csv"), series.str());
  auto summary = peernet::structure_summary(stats, a.scenario, {a.duopoly_threshold},
                                            {a.monopoly_threshold});
  summary["horizon"] = a.horizon;
  summary["seed"] = a.shared.seed;
  peernet::write_text_file(out_file(a.shared, "counterfact_summary.json"),
                           summary.dump(2) + "\n");

  ordered_json params = shared_params(a.shared);
  params["scenario"] = a.scenario;
  params["horizon"] = a.horizon;
  params["replications"] = a.replications;
  params["grid_step"] = a.grid_step;
  params["duopoly_threshold"] = a.duopoly_threshold;
  params["monopoly_threshold"] = a.monopoly_threshold;
  save_manifest(a.shared, "counterfact", {a.fit_path, a.initial_path, a.markets_path},
                {"structure_series.csv", "counterfact_summary.json"}, std::move(params));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-effect choice models: simulation, identification, estimation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Draw a random validator-passing model");
  add_shared(c_gen, gen.shared);
  c_gen->add_option("--agents", gen.agents, "Number of agents")->check(CLI::PositiveNumber);
  c_gen->add_option("--menu", gen.menu, "Largest non-default alternative")
      ->check(CLI::PositiveNumber);
  c_gen->add_option("--attempts", gen.attempts, "Rejection-sampling budget")
      ->check(CLI::PositiveNumber);

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Check a model file against the assumptions");
  add_shared(c_val, val.shared);
  c_val->add_option("--model", val.model_path, "Model JSON")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate an event trajectory from a model");
  add_shared(c_sim, sim.shared);
  c_sim->add_option("--model", sim.model_path, "Model JSON")->required();
  c_sim->add_option("--horizon", sim.horizon, "Simulation horizon")
      ->required()
      ->check(CLI::PositiveNumber);
  c_sim->add_option("--delta", sim.delta, "Also emit a panel sampled at this interval");
  c_sim->add_option("--initial", sim.initial, "Initial configuration (one entry per agent)");

  RecoverArgs rec;
  auto* c_rec = app.add_subcommand("recover-ccp", "Estimate CCPs from events or a panel");
  add_shared(c_rec, rec.shared);
  c_rec->add_option("--events", rec.events_path, "Event CSV from simulate");
  c_rec->add_option("--meta", rec.meta_path, "Event sidecar JSON");
  c_rec->add_option("--panel", rec.panel_path, "Interval panel CSV");
  c_rec->add_option("--menu", rec.menu, "Largest non-default alternative")
      ->required()
      ->check(CLI::PositiveNumber);

  IdentifyArgs ide;
  auto* c_ide = app.add_subcommand("identify", "Recover networks and primitives from CCPs");
  add_shared(c_ide, ide.shared);
  c_ide->add_option("--ccp", ide.ccp_path, "CCP CSV")->required();
  c_ide->add_option("--diagnostics", ide.diagnostics_path, "CCP diagnostics JSON")->required();
  c_ide->add_option("--mode", ide.mode, "exact or statistical");
  c_ide->add_option("--threshold", ide.threshold,
                    "Zero tolerance (exact) or SE multiplier (statistical)");
  c_ide->add_option("--anchor-file", ide.anchor_path, "Anchor JSON for absolute tables");
  c_ide->add_option("--known-side", ide.known_side,
                    "Binary menus: which side --known-sets-file supplies");
  c_ide->add_option("--known-sets-file", ide.known_sets_path, "Per-agent peer lists, JSON");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit the firm opening model to panel CSVs");
  add_shared(c_fit, fit.shared);
  c_fit->add_option("--openings", fit.openings_path, "Opening events CSV")->required();
  c_fit->add_option("--markets", fit.markets_path, "Market covariate CSV")->required();
  c_fit->add_option("--geography", fit.geography_path, "Market geography CSV");
  c_fit->add_option("--borders", fit.borders_path, "Border pair CSV");
  c_fit->add_option("--k-nearest", fit.k_nearest, "Nearest-market rule for the candidate network")
      ->check(CLI::PositiveNumber);
  c_fit->add_flag("--full-consideration", fit.full_consideration,
                  "Drop the attention side of the likelihood");
  c_fit->add_flag("--search", fit.search, "Greedy link-deletion network search");
  c_fit->add_flag("--tie-firms", fit.tie_firms, "Delete links for all firms at once");
  c_fit->add_option("--starts", fit.starts, "Optimizer starts")->check(CLI::PositiveNumber);
  c_fit->add_option("--max-iterations", fit.max_iterations, "Optimizer iteration budget")
      ->check(CLI::PositiveNumber);

  CounterfactArgs cf;
  auto* c_cf = app.add_subcommand("counterfact", "Simulate market structure under a scenario");
  add_shared(c_cf, cf.shared);
  c_cf->add_option("--fit", cf.fit_path, "model_fit.json from fit")->required();
  c_cf->add_option("--scenario", cf.scenario,
                   "baseline, full_consideration, no_spillover, or swapped_initial");
  c_cf->add_option("--horizon", cf.horizon, "Days to simulate")
      ->required()
      ->check(CLI::PositiveNumber);
  c_cf->add_option("--replications", cf.replications, "Simulated paths")
      ->check(CLI::PositiveNumber);
  c_cf->add_option("--initial-file", cf.initial_path, "Initial store counts CSV");
  c_cf->add_option("--markets", cf.markets_path, "Market covariate CSV (frozen at last row)");
  c_cf->add_option("--grid-step", cf.grid_step, "Grid spacing for structure fractions")
      ->check(CLI::PositiveNumber);
  c_cf->add_option("--threshold", cf.duopoly_threshold, "Duopoly fraction threshold");
  c_cf->add_option("--monopoly-threshold", cf.monopoly_threshold, "Monopoly fraction threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_val->parsed()) return cmd_validate(val);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_rec->parsed()) return cmd_recover(rec);
    if (c_ide->parsed()) return cmd_identify(ide);
    if (c_fit->parsed()) return cmd_fit(fit);
    if (c_cf->parsed()) return cmd_counterfact(cf);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
