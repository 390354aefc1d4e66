#pragma once

// Counterfactual experiments on a fitted opening model. A scenario transforms
// (theta, network, initial counts) without re-estimating anything; the daily
// simulator then replays the opening process under counter-based uniforms so
// coupled scenarios share every acceptance draw per (replication, day, agent).

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "peernet/estimation.hpp"
#include "peernet/io.hpp"
#include "peernet/rng.hpp"

namespace peernet {

// S1 turns consideration off wholesale, S2 removes the cross-market attention
// spillovers, S3 swaps the two firms' starting store counts. Profit-side
// parameters are never modified by any tag.
enum class Scenario { baseline, full_consideration, no_spillover, swapped_initial };

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::baseline: return "baseline";
    case Scenario::full_consideration: return "full_consideration";
    case Scenario::no_spillover: return "no_spillover";
    case Scenario::swapped_initial: return "swapped_initial";
  }
  throw std::invalid_argument("unknown scenario tag");
}

inline Scenario parse_scenario(const std::string& name) {
  if (name == "baseline") return Scenario::baseline;
  if (name == "full_consideration") return Scenario::full_consideration;
  if (name == "no_spillover") return Scenario::no_spillover;
  if (name == "swapped_initial") return Scenario::swapped_initial;
  throw std::invalid_argument("unknown scenario tag: " + name);
}

struct ScenarioSetup {
  Eigen::VectorXd theta;
  ConsiderationNetwork network;
  std::vector<std::vector<int>> initial_counts;  // [firm][market]
  bool full_consideration = false;
};

inline ScenarioSetup apply_scenario(const ThetaLayout& layout, Eigen::VectorXd theta,
                                    ConsiderationNetwork network,
                                    std::vector<std::vector<int>> initial_counts, Scenario s) {
  if (theta.size() != layout.dim())
    throw std::invalid_argument("theta length does not match the layout");
  if (static_cast<int>(initial_counts.size()) != layout.n_firms)
    throw std::invalid_argument("initial counts must have one row per firm");
  ScenarioSetup out{std::move(theta), std::move(network), std::move(initial_counts), false};
  switch (s) {
    case Scenario::baseline:
      break;
    case Scenario::full_consideration:
      out.full_consideration = true;
      break;
    case Scenario::no_spillover:
      for (int f = 0; f < layout.n_firms; ++f)
        for (int pf = 0; pf < layout.n_firms; ++pf) {
          out.theta[layout.att_spill(f, pf)] = 0.0;
          out.theta[layout.att_spill_sq(f, pf)] = 0.0;
        }
      break;
    case Scenario::swapped_initial:
      if (out.initial_counts.size() != 2)
        throw std::invalid_argument("swapped_initial needs exactly two firms, got " +
                                    std::to_string(out.initial_counts.size()));
      std::swap(out.initial_counts[0], out.initial_counts[1]);
      break;
  }
  return out;
}

// One replication of simulated expansion. Events carry unit increments and
// strictly increasing times (same-day openings sit kSameDayOffset apart).
struct SimulatedPath {
  std::vector<FirmEvent> events;
};

// Daily thinned simulation: every agent (firm, market) gets one potential
// decision per day and accepts it with the day-start opening probability.
// Covariates follow last observation carried forward, so they stay frozen
// beyond the final sample. The acceptance draw is
// counter_uniform(seed, replication, day, firm * n_markets + market), which is
// what makes cross-scenario couplings share randomness exactly.
inline std::vector<SimulatedPath> simulate_market_paths(
    const ScenarioSetup& setup, const std::vector<std::vector<CovariateSample>>& covariates,
    int n_covariates, int horizon_days, int replications, std::uint64_t seed) {
  if (horizon_days < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (replications < 0) throw std::invalid_argument("replication count must be nonnegative");
  const int n_firms = setup.network.n_firms;
  const int n_markets = setup.network.n_markets;
  if (static_cast<int>(setup.initial_counts.size()) != n_firms)
    throw std::invalid_argument("initial counts must have one row per firm");
  for (const auto& row : setup.initial_counts)
    if (static_cast<int>(row.size()) != n_markets)
      throw std::invalid_argument("initial counts must have one column per market");
  if (static_cast<int>(covariates.size()) != n_markets)
    throw std::invalid_argument("covariate paths must cover every market");

  const OpeningModel model(setup.network, ThetaLayout{n_firms, n_covariates + 1}, setup.theta,
                           setup.full_consideration);

  std::vector<SimulatedPath> paths(static_cast<std::size_t>(replications));
  std::vector<std::vector<double>> cov_rows(static_cast<std::size_t>(n_markets));
  std::vector<std::pair<int, int>> openers;
  for (int r = 0; r < replications; ++r) {
    auto counts = setup.initial_counts;
    auto& events = paths[static_cast<std::size_t>(r)].events;
    for (int day = 1; day <= horizon_days; ++day) {
      const double t = static_cast<double>(day);
      for (int m = 0; m < n_markets; ++m)
        cov_rows[static_cast<std::size_t>(m)] =
            covariate_row(covariates[static_cast<std::size_t>(m)], n_covariates, m, t);
      openers.clear();
      for (int f = 0; f < n_firms; ++f)
        for (int m = 0; m < n_markets; ++m) {
          const double u = counter_uniform(seed, static_cast<std::uint64_t>(r),
                                           static_cast<std::uint64_t>(day),
                                           static_cast<std::uint64_t>(f * n_markets + m));
          if (u < model.opening_prob(counts, cov_rows[static_cast<std::size_t>(m)], f, m))
            openers.emplace_back(f, m);
        }
      for (std::size_t j = 0; j < openers.size(); ++j) {
        const auto [f, m] = openers[j];
        events.push_back(
            FirmEvent{t + static_cast<double>(j) * kSameDayOffset, f, m, 1});
        ++counts[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)];
      }
    }
  }
  return paths;
}

// Market-structure fractions on a time grid. Classification counts the firms
// holding at least one store: none = unserved, one = monopoly, two or more =
// duopoly. Counts are exact integers; each division happens once, so the
// aggregation cannot depend on replication order.
struct MarketStructureSeries {
  std::vector<double> grid;
  std::vector<std::vector<double>> duopoly;   // [replication][grid point]
  std::vector<std::vector<double>> monopoly;
  std::vector<std::vector<double>> unserved;
  std::vector<double> mean_duopoly;
  std::vector<double> mean_monopoly;
  std::vector<double> mean_unserved;
};

inline MarketStructureSeries market_structure_stats(
    const std::vector<SimulatedPath>& paths, const std::vector<std::vector<int>>& initial_counts,
    const std::vector<double>& grid) {
  const int n_firms = static_cast<int>(initial_counts.size());
  if (n_firms == 0) throw std::invalid_argument("initial counts must have one row per firm");
  const int n_markets = static_cast<int>(initial_counts.front().size());
  if (n_markets == 0) throw std::invalid_argument("initial counts must have one column per market");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid times must increase");

  const std::size_t R = paths.size();
  const std::size_t G = grid.size();
  MarketStructureSeries out;
  out.grid = grid;
  out.duopoly.assign(R, std::vector<double>(G, 0.0));
  out.monopoly.assign(R, std::vector<double>(G, 0.0));
  out.unserved.assign(R, std::vector<double>(G, 0.0));
  std::vector<long long> total_duo(G, 0), total_mono(G, 0), total_un(G, 0);

  for (std::size_t r = 0; r < R; ++r) {
    auto counts = initial_counts;
    const auto& events = paths[r].events;
    std::size_t next = 0;
    for (std::size_t g = 0; g < G; ++g) {
      while (next < events.size() && events[next].time <= grid[g]) {
        const auto& ev = events[next];
        counts[static_cast<std::size_t>(ev.firm)][static_cast<std::size_t>(ev.market)] +=
            ev.increment;
        ++next;
      }
      int duo = 0, mono = 0, un = 0;
      for (int m = 0; m < n_markets; ++m) {
        int present = 0;
        for (int f = 0; f < n_firms; ++f)
          if (counts[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)] > 0) ++present;
        if (present == 0)
          ++un;
        else if (present == 1)
          ++mono;
        else
          ++duo;
      }
      out.duopoly[r][g] = static_cast<double>(duo) / n_markets;
      out.monopoly[r][g] = static_cast<double>(mono) / n_markets;
      out.unserved[r][g] = static_cast<double>(un) / n_markets;
      total_duo[g] += duo;
      total_mono[g] += mono;
      total_un[g] += un;
    }
  }

  out.mean_duopoly.assign(G, 0.0);
  out.mean_monopoly.assign(G, 0.0);
  out.mean_unserved.assign(G, 0.0);
  if (R > 0) {
    const double denom = static_cast<double>(R) * n_markets;
    for (std::size_t g = 0; g < G; ++g) {
      out.mean_duopoly[g] = static_cast<double>(total_duo[g]) / denom;
      out.mean_monopoly[g] = static_cast<double>(total_mono[g]) / denom;
      out.mean_unserved[g] = static_cast<double>(total_un[g]) / denom;
    }
  }
  return out;
}

// Rows per replication then a mean row per grid point; the replication column
// holds the index or the literal "mean".
inline void write_structure_series(std::ostream& os, const MarketStructureSeries& series,
                                   const std::string& scenario_label) {
  os << "t,frac_duopoly,frac_monopoly,frac_unserved,scenario,replication\n";
  for (std::size_t r = 0; r < series.duopoly.size(); ++r)
    for (std::size_t g = 0; g < series.grid.size(); ++g)
      os << format_double(series.grid[g]) << "," << format_double(series.duopoly[r][g]) << ","
         << format_double(series.monopoly[r][g]) << "," << format_double(series.unserved[r][g])
         << "," << scenario_label << "," << r << "\n";
  for (std::size_t g = 0; g < series.grid.size(); ++g)
    os << format_double(series.grid[g]) << "," << format_double(series.mean_duopoly[g]) << ","
       << format_double(series.mean_monopoly[g]) << "," << format_double(series.mean_unserved[g])
       << "," << scenario_label << ",mean\n";
}

// First grid time at which the series reaches the level, if any.
inline std::optional<double> first_crossing(const std::vector<double>& grid,
                                            const std::vector<double>& series, double level) {
  if (grid.size() != series.size())
    throw std::invalid_argument("series length does not match the grid");
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (series[g] >= level) return grid[g];
  return std::nullopt;
}

inline nlohmann::ordered_json structure_summary(const MarketStructureSeries& series,
                                                const std::string& scenario_label,
                                                const std::vector<double>& duopoly_levels,
                                                const std::vector<double>& monopoly_levels) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_label;
  j["replications"] = series.duopoly.size();
  j["grid_points"] = series.grid.size();
  auto crossings = [&series](const std::vector<double>& mean, const std::vector<double>& levels) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (double level : levels) {
      nlohmann::ordered_json entry;
      entry["level"] = level;
      const auto t = first_crossing(series.grid, mean, level);
      if (t)
        entry["first_time"] = *t;
      else
        entry["first_time"] = nullptr;
      arr.push_back(entry);
    }
    return arr;
  };
  j["duopoly_first_time"] = crossings(series.mean_duopoly, duopoly_levels);
  j["monopoly_first_time"] = crossings(series.mean_monopoly, monopoly_levels);
  if (!series.grid.empty()) {
    j["final"] = {{"duopoly", series.mean_duopoly.back()},
                  {"monopoly", series.mean_monopoly.back()},
                  {"unserved", series.mean_unserved.back()}};
  }
  return j;
}

}  // namespace peernet
