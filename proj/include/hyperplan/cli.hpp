#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hyperplan/abstraction.hpp"
#include "hyperplan/bench.hpp"
#include "hyperplan/dot.hpp"
#include "hyperplan/library.hpp"
#include "hyperplan/planner.hpp"
#include "hyperplan/reuse.hpp"
#include "hyperplan/scenario.hpp"

namespace hyperplan::cli {

enum ExitCode : int { kOk = 0, kPlanningFailure = 1, kInputError = 2 };

namespace detail {

using hyperplan::detail::Fields;

struct DotArc {
  std::string text;
  bool handoff = false;
};

inline std::string assertion_text(const Json& a) {
  if (a.contains("on")) {
    return a.at("on").get<std::string>() + "@" + a.at("region").get<std::string>() + "[" +
           std::to_string(a.at("height").get<std::size_t>()) + "]";
  }
  if (a.contains("in")) return a.at("in").get<std::string>() + "@" + a.at("region").get<std::string>();
  if (a.contains("held")) return a.at("by").get<std::string>() + " holds " + a.at("held").get<std::string>();
  if (a.contains("in_transit")) return a.at("in_transit").get<std::string>() + " in transit";
  throw ParseError("plan: unrecognised assertion " + a.dump());
}

inline DotArc action_text(const Json& a) {
  const std::string type = a.at("type").get<std::string>();
  auto s = [&](const char* k) { return a.at(k).get<std::string>(); };
  if (type == "pick") return {"pick(" + s("robot") + ", " + s("object") + ", " + s("region") + ")", false};
  if (type == "place") return {"place(" + s("robot") + ", " + s("object") + ", " + s("region") + ")", false};
  if (type == "handoff") return {"handoff(" + s("giver") + " -> " + s("receiver") + ", " + s("object") + ")", true};
  throw ParseError("plan: unknown action type '" + type + "'");
}

/// Renders a plan file straight from the names it carries, so no scenario is
/// needed. Labels match `solution_style`.
inline std::string plan_file_dot(const std::string& text) {
  Json doc = hyperplan::detail::parse_json(text, "plan");
  Fields root(doc, "plan");
  root.only({"version", "scenario", "nodes", "arcs"});
  try {
    using G = Hypergraph<std::string, DotArc>;
    std::vector<G::Node> nodes;
    for (const auto& n : root.array("nodes")) {
      std::string label = "{";
      const auto& ents = n.at("entities");
      for (std::size_t i = 0; i < ents.size(); ++i) label += (i ? ", " : "") + ents[i].get<std::string>();
      label += "}";
      for (const auto& a : n.at("assertions")) label += "\n" + assertion_text(a);
      nodes.push_back({NodeId(n.at("id").get<std::size_t>()), label});
    }
    std::vector<G::Arc> arcs;
    for (const auto& a : root.array("arcs")) {
      std::vector<NodeId> tail, head;
      for (const auto& t : a.at("tails")) tail.emplace_back(t.get<std::size_t>());
      for (const auto& h : a.at("heads")) head.emplace_back(h.get<std::size_t>());
      arcs.push_back({ArcId(a.at("id").get<std::size_t>()), action_text(a.at("action")), tail, head});
    }
    RenderStyle<std::string, DotArc> style;
    style.graph_name = root.string("scenario");
    style.node_label = [](const std::string& s) { return s; };
    style.arc_label = [](const DotArc& a) { return a.text; };
    style.dashed = [](const DotArc& a) { return a.handoff; };
    return to_dot(G::unchecked(std::move(nodes), std::move(arcs)), style);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  } catch (const StructureError& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
}

inline void write_output(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  write_file_atomic(p, text);
}

inline std::string solve_stats_json(const std::string& scenario, const SearchStats& s) {
  Json j;
  j["scenario"] = scenario;
  j["mode"] = "scratch";
  j["expansions"] = s.expansions;
  j["generated"] = s.generated;
  j["actions"] = s.solution_actions;
  j["makespan"] = s.makespan;
  j["wall_time_ms"] = s.wall_time_ms();
  return j.dump(2) + "\n";
}

inline std::string reuse_stats_json(const std::string& scenario, const ReuseStats& s) {
  Json j;
  j["scenario"] = scenario;
  j["mode"] = "reuse";
  j["expansions"] = s.expansions;
  j["subproblem_expansions"] = s.subproblem_expansions;
  j["actions"] = s.actions;
  j["makespan"] = s.makespan;
  j["fallback_used"] = s.fallback_used;
  j["wall_time_ms"] = s.wall_time_ms();
  return j.dump(2) + "\n";
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-robot restacking planner with strategy reuse", "hyperplan"};
  app.require_subcommand(1);

  std::size_t max_expansions = SearchConfig{}.max_expansions;

  std::string solve_scenario, solve_out, solve_dot, solve_stats;
  auto* solve = app.add_subcommand("solve", "Plan a scenario from scratch");
  solve->add_option("scenario", solve_scenario, "Scenario file")->required();
  solve->add_option("--out", solve_out, "Write the plan here instead of stdout");
  solve->add_option("--dot", solve_dot, "Write a DOT rendering of the plan");
  solve->add_option("--stats", solve_stats, "Write search statistics as JSON");
  solve->add_option("--max-expansions", max_expansions, "Search budget")->check(CLI::PositiveNumber);

  std::string ex_scenario, ex_plan, ex_out, ex_id, ex_timestamp;
  auto* extract = app.add_subcommand("extract", "Extract a reusable strategy from a plan");
  extract->add_option("scenario", ex_scenario, "Scenario file the plan solves")->required();
  extract->add_option("plan", ex_plan, "Plan file")->required();
  extract->add_option("--out", ex_out, "Strategy file to write")->required();
  extract->add_option("--id", ex_id, "Strategy id (default: scenario name)");
  extract->add_option("--timestamp", ex_timestamp, "Provenance timestamp (default: now, UTC)");

  std::string re_scenario, re_strategy, re_library, re_out, re_dot, re_stats;
  bool re_fallback = false;
  auto* reuse = app.add_subcommand("reuse", "Solve a scenario by grounding and refining a stored strategy");
  reuse->add_option("scenario", re_scenario, "Scenario file")->required();
  auto* opt_strategy = reuse->add_option("--strategy", re_strategy, "Strategy file");
  auto* opt_library = reuse->add_option("--library", re_library, "Strategy library directory");
  opt_strategy->excludes(opt_library);
  reuse->add_flag("--fallback-scratch", re_fallback, "Plan from scratch when reuse fails");
  reuse->add_option("--out", re_out, "Write the plan here instead of stdout");
  reuse->add_option("--dot", re_dot, "Write a DOT rendering of the plan");
  reuse->add_option("--stats", re_stats, "Write reuse statistics as JSON");
  reuse->add_option("--max-expansions", max_expansions, "Budget per search")->check(CLI::PositiveNumber);

  std::vector<std::string> bench_scenarios;
  std::string bench_library, bench_out;
  auto* bench = app.add_subcommand("bench", "Compare scratch planning with strategy reuse");
  bench->add_option("scenarios", bench_scenarios, "Scenario files")->required();
  bench->add_option("--library", bench_library, "Strategy library directory (created if missing)")->required();
  bench->add_option("--out", bench_out, "CSV file to write")->required();
  bench->add_option("--max-expansions", max_expansions, "Budget per search")->check(CLI::PositiveNumber);

  std::string dot_in, dot_out;
  auto* dot = app.add_subcommand("dot", "Render a plan or strategy file as DOT");
  dot->add_option("file", dot_in, "Plan or strategy file")->required();
  dot->add_option("--out", dot_out, "DOT file to write")->required();

  std::size_t tower_height = 0;
  std::string tower_layout = "inplace", tower_out;
  auto* tower = app.add_subcommand("generate-tower", "Write a tower-reversal scenario");
  tower->add_option("height", tower_height, "Number of objects")->required();
  tower->add_option("--layout", tower_layout, "inplace or transfer")->check(CLI::IsMember({"inplace", "transfer"}));
  tower->add_option("--out", tower_out, "Scenario file to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  const SearchConfig search{max_expansions};
  auto emit_plan = [&](const std::string& path, const std::string& text) {
    if (path.empty()) {
      out << text;
    } else {
      detail::write_output(path, text);
    }
  };

  try {
    if (*solve) {
      Scenario sc = load_scenario(solve_scenario);
      PlanResult r = plan(sc.problem, search);
      emit_plan(solve_out, plan_to_json(r.graph, sc.problem, sc.name));
      if (!solve_dot.empty()) detail::write_output(solve_dot, to_dot(r.graph, solution_style(sc.problem, sc.name)));
      if (!solve_stats.empty()) detail::write_output(solve_stats, detail::solve_stats_json(sc.name, r.stats));
      if (!solve_out.empty()) {
        out << sc.name << ": " << r.actions.size() << " actions, makespan " << r.stats.makespan << ", "
            << r.stats.expansions << " expansions\n";
      }
      return kOk;
    }

    if (*extract) {
      Scenario sc = load_scenario(ex_scenario);
      SolutionHypergraph h;
      try {
        h = parse_plan(read_file(ex_plan), sc.problem);
        auto run = execute_hypergraph(h, sc.problem);
        if (!is_goal(run.final_state, sc.problem)) throw ValidationError("the plan does not reach the goal");
      } catch (const InputError& e) {
        throw ValidationError(ex_plan + ": " + e.what());
      } catch (const Error& e) {
        throw ValidationError(ex_plan + ": invalid plan: " + e.what());
      }
      auto ah = extract_strategy(h, sc.problem);
      auto rec = ex_timestamp.empty() ? make_record(std::move(ah), ex_id.empty() ? sc.name : ex_id, sc.name)
                                      : make_record(std::move(ah), ex_id.empty() ? sc.name : ex_id, sc.name, ex_timestamp);
      detail::write_output(ex_out, strategy_to_json(rec));
      out << rec.id << ": " << rec.ah.object_count << " abstract objects, " << rec.ah.graph.arc_count()
          << " abstract arcs\n";
      return kOk;
    }

    if (*reuse) {
      if (re_strategy.empty() && re_library.empty()) {
        err << "reuse: one of --strategy or --library is required\n";
        return kInputError;
      }
      Scenario sc = load_scenario(re_scenario);
      const RefinementConfig cfg{search, re_fallback ? Fallback::ScratchFallback : Fallback::FailHard};
      std::optional<StrategyRecord> rec;
      if (!re_strategy.empty()) {
        rec = load_strategy_file(re_strategy);
      } else {
        rec = retrieve(sc.problem, load(re_library));
      }
      ReuseResult r;
      std::string source;
      if (rec) {
        r = reuse_pipeline(rec->ah, sc.problem, cfg);
        source = "strategy " + rec->id;
      } else if (re_fallback) {
        r = hyperplan::detail::scratch_fallback(sc.problem, cfg, std::chrono::steady_clock::now());
        source = "no matching strategy";
      } else {
        err << "reuse: no strategy in " << re_library << " matches " << sc.name << "\n";
        return kPlanningFailure;
      }
      emit_plan(re_out, plan_to_json(r.graph, sc.problem, sc.name));
      if (!re_dot.empty()) detail::write_output(re_dot, to_dot(r.graph, solution_style(sc.problem, sc.name)));
      if (!re_stats.empty()) detail::write_output(re_stats, detail::reuse_stats_json(sc.name, r.stats));
      if (!re_out.empty()) {
        out << sc.name << ": " << r.stats.actions << " actions, makespan " << r.stats.makespan << ", "
            << r.stats.expansions << " expansions (" << source << (r.stats.fallback_used ? ", scratch fallback" : "")
            << ")\n";
      }
      return kOk;
    }

    if (*bench) {
      std::vector<Scenario> scenarios;
      for (const auto& f : bench_scenarios) scenarios.push_back(load_scenario(f));
      auto rows = run_bench(scenarios, bench_library, search);
      detail::write_output(bench_out, emit_bench_csv(rows));
      out << rows.size() << " rows written to " << bench_out << "\n";
      return kOk;
    }

    if (*dot) {
      const std::string text = read_file(dot_in);
      Json doc = hyperplan::detail::parse_json(text, dot_in);
      std::string rendered;
      if (doc.is_object() && doc.contains("signature")) {
        auto rec = parse_strategy(text, dot_in);
        rendered = to_dot(rec.ah.graph, abstract_style(rec.id));
      } else {
        try {
          rendered = detail::plan_file_dot(text);
        } catch (const InputError& e) {
          throw ParseError(dot_in + ": " + e.what());
        }
      }
      detail::write_output(dot_out, rendered);
      return kOk;
    }

    if (*tower) {
      if (tower_height == 0) throw ValidationError("generate-tower: height must be positive");
      auto sc = tower_scenario(tower_height, tower_layout == "transfer" ? TowerLayout::Transfer : TowerLayout::InPlace);
      detail::write_output(tower_out, serialize_scenario(sc));
      return kOk;
    }
  } catch (const PlanningFailure& e) {
    err << "planning failed: " << e.what() << "\n";
    return kPlanningFailure;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace hyperplan::cli
