#include <iostream>

#include <CLI11.hpp>

#include "amod/harness.hpp"

using namespace amod;

int main(int argc, char** argv) {
  CLI::App app{"Fleet rebalancing for autonomous mobility-on-demand"};
  app.require_subcommand(1);

  // generate-scenario
  GenerateCommand gen;
  std::string kind = "hotspot";
  auto* g = app.add_subcommand("generate-scenario", "Write a synthetic scenario as JSON");
  g->add_option("--kind", kind, "grid | hotspot | ring | irregular")->capture_default_str();
  g->add_option("--rows", gen.params.rows)->capture_default_str();
  g->add_option("--cols", gen.params.cols)->capture_default_str();
  g->add_option("--stations", gen.params.stations, "Station count (ring, irregular)")->capture_default_str();
  g->add_option("--vehicles-per-station", gen.params.vehicles_per_station)->capture_default_str();
  g->add_option("--demand-per-station", gen.params.demand_per_station)->capture_default_str();
  g->add_option("--base-cost", gen.params.base_cost)->capture_default_str();
  g->add_option("--base-price", gen.params.base_price)->capture_default_str();
  g->add_option("--episode-length", gen.params.episode_length)->capture_default_str();
  g->add_option("--bin-length", gen.params.bin_length)->capture_default_str();
  g->add_option("--horizon", gen.params.planning_horizon)->capture_default_str();
  g->add_option("--seed", gen.params.seed)->capture_default_str();
  g->add_option("--out", gen.out)->required();

  // train
  TrainCommand tr;
  std::string metrics;
  auto* t = app.add_subcommand("train", "Train an actor-critic with A2C");
  t->add_option("--scenario", tr.scenario)->required();
  t->add_option("--policy", tr.policy, "gnn | mlp")->capture_default_str();
  t->add_option("--seed", tr.config.seed)->capture_default_str();
  t->add_option("--episodes", tr.config.episodes)->capture_default_str();
  t->add_option("--gamma", tr.config.gamma)->capture_default_str();
  t->add_option("--lr", tr.config.lr)->capture_default_str();
  t->add_option("--reward-scale", tr.config.reward_scale)->capture_default_str();
  t->add_option("--entropy-coef", tr.config.entropy_coef)->capture_default_str();
  t->add_option("--value-coef", tr.config.value_coef)->capture_default_str();
  t->add_option("--eval-every", tr.config.eval_every, "Validate every k episodes and keep the best (0: off)")
      ->capture_default_str();
  t->add_option("--eval-episodes", tr.config.eval_episodes)->capture_default_str();
  t->add_option("--horizon", tr.horizon, "Planning horizon (0: scenario default)")->capture_default_str();
  t->add_option("--checkpoint", tr.checkpoint, "Last checkpoint; best goes to <name>.best<ext>")
      ->capture_default_str();
  t->add_flag("--resume", tr.resume, "Continue from --checkpoint if it exists");
  t->add_option("--out", metrics, "Per-episode metrics CSV");
  t->add_flag("--quiet", tr.quiet);

  // evaluate
  EvaluateCommand ev;
  std::string ev_ckpt, ev_ref, ev_out;
  auto* e = app.add_subcommand("evaluate", "Evaluate a policy with deterministic actions");
  e->add_option("--scenario", ev.scenario)->required();
  e->add_option("--policy", ev.policy, "gnn | mlp | ed | none")->capture_default_str();
  e->add_option("--checkpoint", ev_ckpt);
  e->add_option("--eval-episodes,--episodes", ev.episodes)->capture_default_str();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_option("--horizon", ev.horizon)->capture_default_str();
  e->add_option("--reference", ev_ref, "Policy to report %Dev against");
  e->add_option("--out", ev_out, "JSON summary (stdout if omitted)");

  // transfer
  TransferCommand tf;
  std::string tf_out;
  auto* x = app.add_subcommand("transfer", "Evaluate a trained GNN on unseen scenarios");
  x->add_option("--checkpoint", tf.checkpoint)->required();
  x->add_option("--scenario", tf.scenarios, "One or more scenarios")->required();
  x->add_option("--eval-episodes,--episodes", tf.episodes)->capture_default_str();
  x->add_option("--seed", tf.seed)->capture_default_str();
  x->add_option("--reference", tf.reference)->capture_default_str();
  x->add_option("--out", tf_out);

  // bench-solvers
  BenchCommand bc;
  std::string fault, bc_out;
  auto* b = app.add_subcommand("bench-solvers", "Compare the flow solvers against exhaustive search");
  b->add_option("--trials", bc.config.trials)->capture_default_str();
  b->add_option("--max-stations", bc.config.max_stations)->capture_default_str();
  b->add_option("--seed", bc.config.seed)->capture_default_str();
  b->add_option("--inject-fault", fault, "matching | rebalancing");
  b->add_option("--out", bc_out, "Where to dump the first failing instance");

  // timing
  TimingCommand tc;
  std::string tc_out;
  auto* m = app.add_subcommand("timing", "Per-decision wall time against network size");
  m->add_option("--sizes", tc.sizes)->capture_default_str();
  m->add_option("--decisions", tc.decisions)->capture_default_str();
  m->add_option("--seed", tc.seed)->capture_default_str();
  m->add_option("--out", tc_out, "CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? exit_code::ok : exit_code::usage;
  }

  if (*g) {
    try {
      gen.params.kind = parse_scenario_kind(kind);
    } catch (const std::invalid_argument& err) {
      std::cerr << "error: " << err.what() << "\n";
      return exit_code::usage;
    }
    return cmd_generate_scenario(gen, std::cout, std::cerr);
  }
  if (*t) {
    if (!metrics.empty()) tr.metrics_out = metrics;
    return cmd_train(tr, std::cout, std::cerr);
  }
  if (*e) {
    if (!ev_ckpt.empty()) ev.checkpoint = ev_ckpt;
    if (!ev_ref.empty()) ev.reference = ev_ref;
    if (!ev_out.empty()) ev.out = ev_out;
    return cmd_evaluate(ev, std::cout, std::cerr);
  }
  if (*x) {
    if (!tf_out.empty()) tf.out = tf_out;
    return cmd_transfer(tf, std::cout, std::cerr);
  }
  if (*b) {
    if (!fault.empty()) bc.inject_fault = fault;
    if (!bc_out.empty()) bc.out = bc_out;
    return cmd_bench_solvers(bc, std::cout, std::cerr);
  }
  if (*m) {
    if (!tc_out.empty()) tc.out = tc_out;
    return cmd_timing(tc, std::cout, std::cerr);
  }
  return exit_code::usage;
}
