#include "amod/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "amod/baselines.hpp"
#include "amod/checkpoint.hpp"
#include "amod/scenario_io.hpp"

namespace amod {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<Policy> make_policy(const std::string& name, const std::optional<fs::path>& checkpoint) {
  if (name == "ed") return std::make_unique<EqualDistributionPolicy>();
  if (name == "none") return std::make_unique<NoRebalancePolicy>();
  if (name == "gnn" || name == "mlp") {
    if (!checkpoint) throw std::invalid_argument("policy '" + name + "' needs --checkpoint");
    auto model = load_checkpoint(*checkpoint);
    if (model->kind() != name) {
      throw std::invalid_argument("checkpoint holds a " + model->kind() + " model, not " + name);
    }
    return std::make_unique<ModelPolicy>(std::move(model));
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

double percent_deviation(double reward, double reference) {
  if (reference == 0.0) return reward == 0.0 ? 0.0 : std::copysign(INFINITY, reward);
  return 100.0 * (reward - reference) / std::abs(reference);
}

namespace {

json stats(double mean, double sd) { return json{{"mean", mean}, {"sd", sd}}; }

json summary_body(const EvalSummary& s) {
  json runs = json::array();
  for (const auto& m : s.runs) {
    runs.push_back({{"episode", m.episode},
                    {"reward", m.reward},
                    {"served_demand", m.served_demand},
                    {"rebalancing_cost", m.rebalancing_cost}});
  }
  return json{{"policy", s.policy},
              {"scenario", s.scenario},
              {"episodes", s.episodes},
              {"reward", stats(s.reward_mean, s.reward_sd)},
              {"served_demand", stats(s.served_mean, s.served_sd)},
              {"rebalancing_cost", stats(s.cost_mean, s.cost_sd)},
              {"simplex_valid", s.simplex_valid},
              {"runs", runs}};
}

std::string fmt(double x, int prec = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << x;
  return os.str();
}

std::shared_ptr<const Scenario> load_shared(const fs::path& p) {
  return std::make_shared<const Scenario>(load_scenario(p));
}

// Runs `body`, mapping exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

void write_text(const std::optional<fs::path>& path, const std::string& text, std::ostream& out) {
  if (path) {
    write_file_atomic(*path, text);
  } else {
    out << text;
  }
}

}  // namespace

json summary_to_json(const EvalSummary& s, const std::optional<EvalSummary>& reference) {
  json j = summary_body(s);
  if (reference) {
    j["reference"] = summary_body(*reference);
    j["deviation_pct"] = {{"reward", percent_deviation(s.reward_mean, reference->reward_mean)},
                          {"served_demand", percent_deviation(s.served_mean, reference->served_mean)},
                          {"rebalancing_cost", percent_deviation(s.cost_mean, reference->cost_mean)}};
  }
  return j;
}

std::string metrics_csv_header() { return "episode,reward,served_demand,rebalancing_cost,steps,wall_ms\n"; }

std::string metrics_csv_row(const EpisodeMetrics& m) {
  std::ostringstream os;
  os << m.episode << ',' << std::setprecision(10) << m.reward << ',' << m.served_demand << ','
     << m.rebalancing_cost << ',' << m.steps << ',' << std::setprecision(4) << m.wall_ms << '\n';
  return os.str();
}

// ---- generate -------------------------------------------------------------

int cmd_generate_scenario(const GenerateCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = generate_scenario(c.params);
    save_scenario(s, c.out);
    out << "wrote " << s.name << " (" << s.n_stations() << " stations, fleet " << s.fleet_size << ") to "
        << c.out.string() << "\n";
    return exit_code::ok;
  });
}

// ---- train ----------------------------------------------------------------

fs::path best_checkpoint_path(const fs::path& last) {
  fs::path p = last;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += ".best";
  p += ext;
  return p;
}

int cmd_train(const TrainCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scenario = load_shared(c.scenario);
    TrainerConfig config = c.config;
    if (c.episode_length_from_scenario) config.episode_length = scenario->episode_length;
    config.validate();
    SimulatorOptions sim_opts;
    sim_opts.horizon_override = c.horizon;
    const int horizon = c.horizon > 0 ? c.horizon : scenario->planning_horizon;
    const int features = feature_width(horizon);

    std::shared_ptr<ActorCritic> model;
    int start = 0;
    if (c.resume && fs::exists(c.checkpoint)) {
      std::uint64_t done = 0;
      model = load_checkpoint(c.checkpoint, &done);
      if (model->kind() != c.policy) {
        throw std::invalid_argument("checkpoint holds a " + model->kind() + " model, not " + c.policy);
      }
      start = static_cast<int>(done);
      out << "resuming from episode " << start << "\n";
    } else if (c.policy == "gnn") {
      model = std::make_shared<GnnActorCritic>(features, config.seed);
    } else if (c.policy == "mlp") {
      model = std::make_shared<MlpActorCritic>(scenario->n_stations(), features, config.seed);
    } else {
      throw std::invalid_argument("train: --policy must be gnn or mlp");
    }

    std::ofstream csv;
    if (c.metrics_out) {
      const bool append = c.resume && start > 0 && fs::exists(*c.metrics_out);
      csv.open(*c.metrics_out, append ? std::ios::app : std::ios::trunc);
      if (!csv) throw std::ios_base::failure("cannot open " + c.metrics_out->string());
      if (!append) csv << metrics_csv_header();
    }

    TrainOptions opts;
    opts.start_episode = start;
    opts.last_checkpoint = c.checkpoint;
    opts.best_checkpoint = best_checkpoint_path(c.checkpoint);
    opts.simulator = sim_opts;
    const int report_every = std::max(1, config.episodes / 20);
    opts.on_episode = [&](const EpisodeMetrics& m, const UpdateReport& r) {
      if (csv.is_open()) csv << metrics_csv_row(m) << std::flush;
      if (!c.quiet && ((m.episode + 1) % report_every == 0 || m.episode + 1 == config.episodes)) {
        out << "episode " << m.episode + 1 << "/" << config.episodes << " reward " << fmt(m.reward) << " served "
            << m.served_demand << " cost " << fmt(m.rebalancing_cost) << " actor_loss " << fmt(r.actor_loss, 4)
            << " critic_loss " << fmt(r.critic_loss, 4) << "\n";
      }
    };
    const TrainResult result = train(scenario, *model, config, opts);
    out << "trained " << result.metrics.size() << " episodes; checkpoint " << c.checkpoint.string() << "\n";
    return exit_code::ok;
  });
}

// ---- evaluate -------------------------------------------------------------

int cmd_evaluate(const EvaluateCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scenario = load_shared(c.scenario);
    SimulatorOptions opts;
    opts.horizon_override = c.horizon;
    auto policy = make_policy(c.policy, c.checkpoint);
    const EvalSummary s = evaluate_policy(scenario, *policy, c.episodes, c.seed, opts);
    std::optional<EvalSummary> ref;
    if (c.reference) {
      auto rp = make_policy(*c.reference, c.checkpoint);
      ref = evaluate_policy(scenario, *rp, c.episodes, c.seed, opts);
    }
    write_text(c.out, summary_to_json(s, ref).dump(2) + "\n", out);
    if (c.out) {
      out << s.policy << " on " << s.scenario << ": reward " << fmt(s.reward_mean) << " +- " << fmt(s.reward_sd);
      if (ref) out << " (" << fmt(percent_deviation(s.reward_mean, ref->reward_mean)) << "% vs " << ref->policy << ")";
      out << "\n";
    }
    return s.simplex_valid ? exit_code::ok : exit_code::failure;
  });
}

// ---- transfer -------------------------------------------------------------

int cmd_transfer(const TransferCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.scenarios.empty()) throw std::invalid_argument("transfer: at least one --scenario is required");
    auto model = load_checkpoint(c.checkpoint);
    if (model->kind() != "gnn") throw std::invalid_argument("transfer needs a gnn checkpoint");
    ModelPolicy policy(model);
    json results = json::array();
    bool valid = true;
    for (const auto& path : c.scenarios) {
      const auto scenario = load_shared(path);
      const EvalSummary s = evaluate_policy(scenario, policy, c.episodes, c.seed);
      auto rp = make_policy(c.reference, std::nullopt);
      const EvalSummary ref = evaluate_policy(scenario, *rp, c.episodes, c.seed);
      valid = valid && s.simplex_valid;
      results.push_back(summary_to_json(s, ref));
    }
    write_text(c.out, results.dump(2) + "\n", out);
    if (c.out) {
      for (const auto& r : results) {
        out << r["scenario"].get<std::string>() << ": reward " << fmt(r["reward"]["mean"].get<double>()) << " ("
            << fmt(r["deviation_pct"]["reward"].get<double>()) << "% vs " << c.reference << ")\n";
      }
    }
    return valid ? exit_code::ok : exit_code::failure;
  });
}

// ---- bench ----------------------------------------------------------------

namespace {

json to_json(const IntMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json to_json(const IntVector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int rand_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// Random metric costs: integer arc lengths closed under shortest paths.
Matrix random_metric_cost(int n, Rng& rng) {
  Matrix c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = i == j ? 0.0 : rand_int(rng, 1, 6);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = std::min(c(i, j), c(i, k) + c(k, j));
  return c;
}

bool matching_feasible(const IntMatrix& x, const IntMatrix& d, const IntVector& idle) {
  if (x.rows() != d.rows() || x.cols() != d.cols()) return false;
  if ((x.array() < 0).any() || (x.array() > d.array()).any()) return false;
  return ((x.rowwise().sum() - idle).array() <= 0).all();
}

bool rebalancing_feasible(const IntMatrix& y, const IntVector& idle, const IntVector& desired) {
  const auto n = idle.size();
  if (y.rows() != n || y.cols() != n || (y.array() < 0).any()) return false;
  for (int i = 0; i < n; ++i) {
    int out = 0, in = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      out += y(i, j);
      in += y(j, i);
    }
    if (out > idle(i) || idle(i) + in - out < desired(i)) return false;
  }
  return true;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

// Deliberately wrong solvers for checking that the bench catches faults.
FlowMatrix faulty_matching(const IntMatrix& d, const Matrix&, const Matrix&, const IntVector& idle) {
  FlowMatrix x{IntMatrix::Zero(d.rows(), d.cols()), FlowRole::passenger};
  for (int i = 0; i < d.rows(); ++i) {  // ignores margins
    int left = idle(i);
    for (int j = 0; j < d.cols(); ++j) {
      x.flows(i, j) = std::min(left, d(i, j));
      left -= x.flows(i, j);
    }
  }
  return x;
}

FlowMatrix faulty_rebalancing(const IntVector& idle, const IntVector& desired, const Matrix&) {
  const auto n = idle.size();
  FlowMatrix y{IntMatrix::Zero(n, n), FlowRole::rebalancing};
  IntVector surplus = (idle - desired).cwiseMax(0);
  IntVector deficit = (desired - idle).cwiseMax(0);
  for (int i = 0, j = 0; i < n && j < n;) {  // north-west corner, cost-blind
    if (surplus(i) == 0) { ++i; continue; }
    if (deficit(j) == 0) { ++j; continue; }
    const int f = std::min(surplus(i), deficit(j));
    y.flows(i, j) += f;
    surplus(i) -= f;
    deficit(j) -= f;
  }
  return y;
}

}  // namespace

BenchReport bench_solvers(const BenchConfig& cfg) {
  BenchReport r;
  Rng rng = Rng::derive(cfg.seed, 0xBE7C);
  auto fail = [&](json instance, double gap) {
    ++r.failures;
    r.max_gap = std::max(r.max_gap, gap);
    if (!r.failing_instance) r.failing_instance = std::move(instance);
  };
  for (int t = 0; t < cfg.trials; ++t) {
    // Matching.
    {
      const int n = rand_int(rng, 1, cfg.max_stations);
      IntMatrix d(n, n);
      Matrix price(n, n), cost(n, n);
      IntVector idle(n);
      double states;
      do {  // keep the exhaustive search small
        states = 1.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            d(i, j) = rng.uniform() < 0.4 ? 0 : rand_int(rng, 0, cfg.max_demand);
            states *= d(i, j) + 1;
          }
      } while (states > 2e5);
      for (int i = 0; i < n; ++i) {
        idle(i) = rand_int(rng, 0, 2 * cfg.max_demand);
        for (int j = 0; j < n; ++j) {
          cost(i, j) = rand_int(rng, 0, 5);
          price(i, j) = rand_int(rng, 0, 8);
        }
      }
      const FlowMatrix x = cfg.matching(d, price, cost, idle);
      const FlowMatrix ref = brute_force_matching(d, price, cost, idle);
      const double got = matching_profit(x, price, cost);
      const double want = matching_profit(ref, price, cost);
      const double gap = std::abs(got - want);
      ++r.matching_trials;
      if (!matching_feasible(x.flows, d, idle) || !close(got, want, cfg.tolerance)) {
        fail(json{{"problem", "matching"}, {"trial", t}, {"demand", to_json(d)}, {"price", to_json(price)},
                  {"cost", to_json(cost)}, {"idle", to_json(idle)}, {"solver_flow", to_json(x.flows)},
                  {"solver_objective", got}, {"oracle_objective", want}},
             gap);
      } else {
        r.max_gap = std::max(r.max_gap, gap);
      }
    }
    // Rebalancing.
    {
      const int n = rand_int(rng, 1, cfg.max_stations);
      IntVector idle = IntVector::Zero(n), desired = IntVector::Zero(n);
      const int fleet = rand_int(rng, 0, 6);
      for (int v = 0; v < fleet; ++v) ++idle(static_cast<int>(rng.below(n)));
      const int want_total = fleet == 0 ? 0 : rand_int(rng, 0, fleet);
      for (int v = 0; v < want_total; ++v) ++desired(static_cast<int>(rng.below(n)));
      const Matrix cost = random_metric_cost(n, rng);
      const FlowMatrix y = cfg.rebalancing(idle, desired, cost);
      const FlowMatrix ref = brute_force_rebalancing(idle, desired, cost);
      const double got = rebalancing_cost(y, cost);
      const double want = rebalancing_cost(ref, cost);
      const double gap = std::abs(got - want);
      ++r.rebalancing_trials;
      if (!rebalancing_feasible(y.flows, idle, desired) || !close(got, want, cfg.tolerance)) {
        fail(json{{"problem", "rebalancing"}, {"trial", t}, {"idle", to_json(idle)}, {"desired", to_json(desired)},
                  {"cost", to_json(cost)}, {"solver_flow", to_json(y.flows)}, {"solver_objective", got},
                  {"oracle_objective", want}},
             gap);
      } else {
        r.max_gap = std::max(r.max_gap, gap);
      }
    }
  }
  return r;
}

int cmd_bench_solvers(const BenchCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    BenchConfig cfg = c.config;
    if (cfg.trials < 0) throw std::invalid_argument("bench-solvers: --trials must be >= 0");
    if (cfg.max_stations < 1 || cfg.max_stations > 4) throw std::invalid_argument("bench-solvers: --max-stations must be in 1..4");
    if (c.inject_fault) {
      if (*c.inject_fault == "matching") {
        cfg.matching = faulty_matching;
      } else if (*c.inject_fault == "rebalancing") {
        cfg.rebalancing = faulty_rebalancing;
      } else {
        throw std::invalid_argument("--inject-fault must be matching or rebalancing");
      }
    }
    if (cfg.trials == 0) {
      err << "warning: 0 trials requested; nothing was checked\n";
      out << "bench-solvers: 0 trials (vacuous pass)\n";
      return exit_code::ok;
    }
    const BenchReport r = bench_solvers(cfg);
    out << "bench-solvers: " << r.matching_trials << " matching + " << r.rebalancing_trials
        << " rebalancing instances, " << r.failures << " failures, max objective gap " << r.max_gap << "\n";
    if (!r.passed()) {
      const std::string dump = r.failing_instance->dump(2) + "\n";
      err << "first failing instance:\n" << dump;
      if (c.out) write_file_atomic(*c.out, dump);
      return exit_code::failure;
    }
    return exit_code::ok;
  });
}

// ---- timing ---------------------------------------------------------------

std::vector<TimingRow> timing_study(const std::vector<int>& sizes, int decisions, std::uint64_t seed) {
  if (decisions < 1) throw std::invalid_argument("timing: decisions must be >= 1");
  std::vector<TimingRow> rows;
  for (const int n : sizes) {
    if (n < 1) throw std::invalid_argument("timing: sizes must be positive");
    int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (n % r != 0) --r;
    GeneratorParams p;
    p.kind = ScenarioKind::hotspot;
    p.rows = r;
    p.cols = n / r;
    p.seed = seed;
    const auto scenario = std::make_shared<const Scenario>(generate_scenario(p));
    GnnActorCritic model(feature_width(scenario->planning_horizon), seed);
    Simulator sim(scenario);
    std::vector<double> ms;
    std::uint64_t episode = 0;
    sim.reset(splitmix64(seed + episode));
    while (static_cast<int>(ms.size()) < decisions) {
      if (sim.done()) sim.reset(splitmix64(seed + ++episode));
      const auto t0 = std::chrono::steady_clock::now();
      const Observation obs = sim.observe();
      const Vector alpha = actor_alpha(model, obs);
      const Vector action = alpha / alpha.sum();
      const IntVector desired = desired_counts(action, sim.state().idle);
      const FlowMatrix y = solve_rebalancing(sim.state().idle, desired, scenario->network.cost);
      const auto t1 = std::chrono::steady_clock::now();
      (void)y;
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      sim.step(action);
    }
    std::sort(ms.begin(), ms.end());
    TimingRow row;
    row.n_stations = n;
    row.decisions = decisions;
    row.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    row.p90_ms = ms[std::min(ms.size() - 1, static_cast<std::size_t>(0.9 * ms.size()))];
    rows.push_back(row);
  }
  return rows;
}

int cmd_timing(const TimingCommand& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = timing_study(c.sizes, c.decisions, c.seed);
    std::ostringstream csv;
    csv << "n_stations,decisions,median_ms,p90_ms\n";
    for (const auto& r : rows) {
      csv << r.n_stations << ',' << r.decisions << ',' << std::setprecision(6) << r.median_ms << ',' << r.p90_ms
          << '\n';
    }
    write_text(c.out, csv.str(), out);
    return exit_code::ok;
  });
}

}  // namespace amod
