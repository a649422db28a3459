#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "hyperplan/errors.hpp"
#include "hyperplan/library.hpp"
#include "hyperplan/planner.hpp"
#include "hyperplan/reuse.hpp"
#include "hyperplan/scenario.hpp"

namespace hyperplan {

enum class TowerLayout {
  InPlace,   // reverse the tower on its own pedestal, two auxiliary pedestals
  Transfer,  // rebuild the tower reversed on a second pedestal
};

/// Two robots reaching every pedestal; objects t0..t{h-1} bottom-to-top.
inline Scenario tower_scenario(std::size_t height, TowerLayout layout = TowerLayout::InPlace) {
  Scenario sc;
  Problem& p = sc.problem;
  if (layout == TowerLayout::InPlace) {
    sc.name = "tower_inplace_h" + std::to_string(height);
    p.regions = {{"tower", RegionKind::Stack, 0}, {"aux_a", RegionKind::Stack, 0}, {"aux_b", RegionKind::Stack, 0}};
  } else {
    sc.name = "tower_transfer_h" + std::to_string(height);
    p.regions = {{"source", RegionKind::Stack, 0}, {"target", RegionKind::Stack, 0}};
  }
  std::vector<RegionIndex> all;
  for (std::size_t i = 0; i < p.regions.size(); ++i) all.emplace_back(i);
  p.robots = {{"left_arm", all, 1}, {"right_arm", all, 1}};
  for (std::size_t i = 0; i < height; ++i) p.objects.push_back("t" + std::to_string(i));
  p.initial = p.empty_state();
  GoalStack goal{RegionIndex(layout == TowerLayout::InPlace ? 0 : 1), {}};
  for (std::size_t i = 0; i < height; ++i) {
    p.initial.regions[0].emplace_back(i);
    goal.objects.emplace_back(height - 1 - i);
  }
  p.goal = {goal};
  validate_problem(p);
  return sc;
}

struct BenchResult {
  std::string scenario;
  std::string mode;  // scratch | reuse
  std::size_t expansions = 0;
  std::size_t actions = 0;
  std::size_t makespan = 0;
  double wall_time_ms = 0;
  bool fallback_used = false;
};

inline std::string emit_bench_csv(std::vector<BenchResult> results) {
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return std::tie(a.scenario, a.mode) < std::tie(b.scenario, b.mode); });
  std::string out = "scenario,mode,expansions,actions,makespan,wall_time_ms,fallback_used\n";
  for (const auto& r : results) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_time_ms);
    out += r.scenario + "," + r.mode + "," + std::to_string(r.expansions) + "," + std::to_string(r.actions) + "," +
           std::to_string(r.makespan) + "," + ms + "," + (r.fallback_used ? "true" : "false") + "\n";
  }
  return out;
}

/// Runs every scenario from scratch and by reuse. When the library holds no
/// matching strategy, one is extracted from the scratch plan and stored, so
/// the library grows across runs.
inline std::vector<BenchResult> run_bench(const std::vector<Scenario>& scenarios, const std::filesystem::path& library,
                                          const SearchConfig& search = {}) {
  std::error_code ec;
  std::filesystem::create_directories(library, ec);
  if (ec) throw IoFailure("cannot create " + library.string() + ": " + ec.message());
  std::vector<BenchResult> out;
  for (const auto& sc : scenarios) {
    const Problem& p = sc.problem;
    PlanResult scratch = plan(p, search);
    out.push_back({sc.name, "scratch", scratch.stats.expansions, scratch.actions.size(), scratch.stats.makespan,
                   scratch.stats.wall_time_ms(), false});

    auto records = load(library);
    auto hit = retrieve(p, records);
    if (!hit) {
      auto rec = make_record(extract_strategy(scratch.graph, p), sc.name, sc.name);
      store(rec, library);
      hit = std::move(rec);
    }
    ReuseResult reused = reuse_pipeline(hit->ah, p, RefinementConfig{search, Fallback::ScratchFallback});
    out.push_back({sc.name, "reuse", reused.stats.expansions, reused.stats.actions, reused.stats.makespan,
                   reused.stats.wall_time_ms(), reused.stats.fallback_used});
  }
  return out;
}

}  // namespace hyperplan
