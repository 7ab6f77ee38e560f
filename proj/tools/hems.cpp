// Copyright 2026 The hemscast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hems: command-line driver for the forecasting and battery-dispatch
// pipeline. See README.md for the workflow.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <tuple>

#include "hems/cohort.hpp"
#include "hems/csv.hpp"
#include "hems/datagen.hpp"
#include "hems/errors.hpp"
#include "hems/mpc.hpp"
#include "hems/report.hpp"
#include "hems/run_config.hpp"
#include "hems/seeding.hpp"
#include "hems/simulator.hpp"
#include "hems/training.hpp"
#include "hems/weights_io.hpp"

namespace fs = std::filesystem;
using namespace hems;

namespace {

// Exit codes (documented in README).
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;
constexpr int kExitSolver = 5;
constexpr int kExitIo = 6;
constexpr int kExitInternal = 70;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kTraining: return kExitTraining;
    case ErrorKind::kSolver: return kExitSolver;
    case ErrorKind::kIo: return kExitIo;
  }
  return kExitInternal;
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out = c.out;
  cfg.validate();
  return cfg;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

// Refuses to overwrite existing outputs unless --force.
void check_outputs(const std::vector<fs::path>& files, bool force) {
  if (force) return;
  for (const auto& f : files) {
    if (fs::exists(f)) {
      throw ConfigError("output " + f.string() + " exists (use --force to overwrite)");
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

struct Cohort {
  CohortManifest manifest;
  fs::path dir;
};

Cohort open_cohort(const fs::path& dir) {
  require_file(dir / "manifest.json", "cohort manifest");
  Cohort c{read_manifest(dir / "manifest.json"), dir};
  for (const auto& h : c.manifest.households) require_file(dir / h.file, "household file");
  require_file(dir / c.manifest.pv_file, "pv file");
  require_file(dir / c.manifest.price_file, "price file");
  return c;
}

const CohortManifestEntry& find_household(const Cohort& c, const std::string& id) {
  for (const auto& h : c.manifest.households) {
    if (h.profile.id == id) return h;
  }
  throw ConfigError("household '" + id + "' is not in the cohort");
}

Tariff load_tariff(const Cohort& c, double injection_ratio) {
  auto con = read_csv(c.dir / c.manifest.price_file, Unit::kEurPerKwh);
  return Tariff::from_consumption(con, injection_ratio);
}

// Sidecar next to a weight file: which household and split produced it and
// the scaler needed to use it.
struct Sidecar {
  std::string household;
  ModelKind kind = ModelKind::kLocal;
  int training_days = 0;
  ScalerParams scaler;
};

fs::path sidecar_path(const fs::path& weights) {
  auto p = weights;
  p.replace_extension(".json");
  return p;
}

void write_sidecar(const fs::path& path, const Sidecar& s) {
  nlohmann::ordered_json j;
  j["format"] = "hemscast-model";
  j["version"] = 1;
  j["household"] = s.household;
  j["model_kind"] = model_kind_name(s.kind);
  j["training_days"] = s.training_days;
  j["scaler"] = {{"min", s.scaler.min}, {"max", s.scaler.max}};
  write_text(path, j.dump(2) + "\n");
}

Sidecar read_sidecar(const fs::path& path) {
  require_file(path, "model sidecar");
  std::ifstream in(path, std::ios::binary);
  try {
    auto j = nlohmann::json::parse(in);
    if (j.at("format") != "hemscast-model" || j.at("version") != 1) {
      throw DataError(path.string() + ": not a model sidecar");
    }
    Sidecar s;
    s.household = j.at("household").get<std::string>();
    s.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    s.training_days = j.at("training_days").get<int>();
    s.scaler = {j.at("scaler").at("min").get<double>(), j.at("scaler").at("max").get<double>()};
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string cell_stem(const std::string& household, ModelKind kind, int days) {
  return household + "-" + model_kind_name(kind) + "-" + std::to_string(days);
}

// ---- commands ----

int cmd_gen_data(const Common& common) {
  auto cfg = load_config(common);
  const fs::path dir = common.out.empty() ? cfg.cohort_dir : fs::path(common.out);
  if (fs::exists(dir) && !fs::is_empty(dir) && !common.force) {
    throw ConfigError("output directory " + dir.string() + " is not empty (use --force)");
  }
  auto profiles = random_profiles(cfg.households, derive_seed(cfg.seed, "profiles"));
  auto series = generate_cohort(profiles, cfg.start, cfg.days, cfg.policy());
  auto pv = generate_pv(cfg.start, cfg.days, cfg.pv_peak_kw, derive_seed(cfg.seed, "pv"));
  auto prices = generate_prices(cfg.start, cfg.days, derive_seed(cfg.seed, "prices"));

  fs::create_directories(dir);
  CohortManifest m;
  m.start = cfg.start;
  m.days = cfg.days;
  m.master_seed = cfg.seed;
  m.pv_file = "pv.csv";
  m.price_file = "prices.csv";
  m.pv_peak_kw = cfg.pv_peak_kw;
  const int pretrain_count = cfg.households - cfg.heldout;
  for (int i = 0; i < cfg.households; ++i) {
    const auto& p = profiles[i];
    CohortManifestEntry e{p, p.id + ".csv", i < pretrain_count ? "pretrain" : "heldout"};
    write_csv(dir / e.file, series.at(p.id));
    m.households.push_back(std::move(e));
  }
  write_csv(dir / m.pv_file, pv);
  write_csv(dir / m.price_file, prices);
  write_manifest(dir / "manifest.json", m);
  std::cout << "wrote " << cfg.households << " households (" << pretrain_count << " pretrain, "
            << cfg.heldout << " held out) to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_pretrain(const Common& common, const std::string& cohort_arg,
                 std::optional<int> epochs) {
  auto cfg = load_config(common);
  if (epochs) cfg.pretrain.epochs = *epochs;
  if (epochs && cfg.pretrain.early_stopping_patience > *epochs) {
    cfg.pretrain.early_stopping_patience = std::max(1, *epochs);
  }
  cfg.validate();
  auto cohort = open_cohort(cohort_arg.empty() ? cfg.cohort_dir : fs::path(cohort_arg));
  const fs::path weights_file = cfg.out / "global.hwt";
  const fs::path history_file = cfg.out / "pretrain_history.csv";
  check_outputs({weights_file, history_file}, common.force);

  std::vector<ForecastSample> train_set, val_set;
  int used = 0;
  for (const auto& h : cohort.manifest.households) {
    if (h.role != "pretrain") continue;
    auto series = read_csv(cohort.dir / h.file);
    auto prep = prepare_pretrain(cfg.model, series, cfg.split.scale_before_split);
    std::move(prep.train.begin(), prep.train.end(), std::back_inserter(train_set));
    std::move(prep.validation.begin(), prep.validation.end(), std::back_inserter(val_set));
    ++used;
  }
  if (used == 0) throw DataError("cohort has no pretrain households");
  const auto tc = cfg.pretrain_config();
  auto init = init_model(cfg.model, derive_seed(cfg.seed, "global-init"));
  std::cout << "pretraining on " << used << " households, " << train_set.size()
            << " training and " << val_set.size() << " validation windows\n";
  auto result = train(init, train_set, val_set, tc);
  fs::create_directories(cfg.out);
  save_weights(result.weights, weights_file);
  write_history_csv(history_file, result.history);
  for (const auto& r : result.history) {
    std::cout << "epoch " << r.epoch << " train " << r.train_loss << " val " << r.val_loss
              << " lr " << r.lr << "\n";
  }
  std::cout << "best epoch " << result.best_epoch << "; weights in " << weights_file.string()
            << "\n";
  return kExitOk;
}

int cmd_train_household(const Common& common, bool finetuning, const std::string& cohort_arg,
                        const std::string& household, std::optional<int> training_days,
                        const std::string& weights_arg, std::optional<double> lr,
                        std::optional<int> epochs) {
  auto cfg = load_config(common);
  if (lr) cfg.finetune_lr = *lr;
  if (epochs) cfg.finetune_epochs = *epochs;
  cfg.validate();
  auto cohort = open_cohort(cohort_arg.empty() ? cfg.cohort_dir : fs::path(cohort_arg));
  const auto& entry = find_household(cohort, household);
  SplitSpec spec = cfg.split;
  if (training_days) spec.training_days = *training_days;
  spec.validate();
  std::optional<ModelWeights> global;
  fs::path global_path = weights_arg.empty() ? cfg.out / "global.hwt" : fs::path(weights_arg);
  if (finetuning) {
    require_file(global_path, "global weights");
    global = load_weights(global_path);
  }
  const ModelKind kind = finetuning ? ModelKind::kFinetuned : ModelKind::kLocal;
  const std::string stem = cell_stem(household, kind, spec.training_days);
  const fs::path weights_file = cfg.out / (stem + ".hwt");
  const fs::path history_file = cfg.out / (stem + ".history.csv");
  check_outputs({weights_file, sidecar_path(weights_file), history_file}, common.force);

  auto series = read_csv(cohort.dir / entry.file);
  const ModelConfig& mcfg = finetuning ? global->config : cfg.model;
  auto prep = prepare_split(mcfg, series, spec);
  const auto seed = cfg.cohort_config().seed;
  auto result = finetuning
                    ? finetune_global_model(*global, prep, cfg.finetune_config(),
                                            cfg.pretrain_config(), seed, household,
                                            spec.training_days)
                    : train_local_model(mcfg, prep, cfg.local_config(), seed, household,
                                        spec.training_days);
  fs::create_directories(cfg.out);
  save_weights(result.weights, weights_file);
  write_sidecar(sidecar_path(weights_file),
                Sidecar{household, kind, spec.training_days, prep.scaler});
  write_history_csv(history_file, result.history);
  std::cout << model_kind_name(kind) << " model for " << household << " ("
            << spec.training_days << " training days, " << prep.train.size()
            << " windows): best epoch " << result.best_epoch << " -> " << weights_file.string()
            << "\n";
  return kExitOk;
}

int cmd_simulate(const Common& common, const std::string& cohort_arg,
                 const std::string& weights_arg, std::string household,
                 std::optional<int> training_days, bool oracle, bool persistence,
                 bool no_battery) {
  auto cfg = load_config(common);
  auto cohort = open_cohort(cohort_arg.empty() ? cfg.cohort_dir : fs::path(cohort_arg));
  std::optional<Sidecar> sidecar;
  std::optional<ModelWeights> weights;
  if (!weights_arg.empty()) {
    if (oracle || persistence) throw ConfigError("--weights excludes --oracle/--persistence");
    require_file(weights_arg, "weights");
    sidecar = read_sidecar(sidecar_path(weights_arg));
    weights = load_weights(weights_arg);
    if (!household.empty() && household != sidecar->household) {
      throw ConfigError("--household disagrees with the weights' household " +
                        sidecar->household);
    }
    household = sidecar->household;
    if (!training_days) training_days = sidecar->training_days;
  } else if (!oracle && !persistence) {
    throw ConfigError("simulate needs --weights, --oracle or --persistence");
  }
  if (oracle && persistence) throw ConfigError("--oracle and --persistence are exclusive");
  if (household.empty()) throw ConfigError("simulate needs --household");
  const auto& entry = find_household(cohort, household);
  SplitSpec spec = cfg.split;
  if (training_days) spec.training_days = *training_days;
  spec.validate();

  ModelKind kind = sidecar ? sidecar->kind : oracle ? ModelKind::kOracle : ModelKind::kPersistence;
  std::string stem = cell_stem(household, kind, spec.training_days);
  if (no_battery) stem += "-no_battery";
  const fs::path log_file = cfg.out / (stem + ".log.csv");
  const fs::path summary_file = cfg.out / (stem + ".summary.csv");
  check_outputs({log_file, summary_file}, common.force);

  auto series = read_csv(cohort.dir / entry.file);
  auto pv = read_csv(cohort.dir / cohort.manifest.pv_file);
  auto tariff = load_tariff(cohort, cfg.injection_ratio);
  auto split = split_dataset(series, spec);
  auto sim = cfg.simulation_config(series.timestamp(split.test_offset));
  if (no_battery) {
    sim.battery = BatteryParams{0.0, 0.0, 0.0, sim.battery.eta, 0.0};
    kind = ModelKind::kNoBattery;
  }
  std::unique_ptr<Forecaster> forecaster;
  if (weights) {
    forecaster = std::make_unique<ModelForecaster>(*weights, sidecar->scaler, sim.point_quantile);
  } else if (oracle) {
    forecaster = std::make_unique<OracleForecaster>();
  } else {
    forecaster = std::make_unique<PersistenceForecaster>();
  }
  const int test_days = spec.test_weeks * 7;
  auto forecast = rolling_forecast(*forecaster, series, split.test_offset, test_days);
  const double mae_kw = mae(forecast, split.test.values());
  auto result = simulate_mpc(series, pv, tariff, *forecaster, sim);

  const auto steps = static_cast<std::size_t>(sim.steps);
  const double nobatt = no_battery_cost(series.slice(split.test_offset, steps),
                                        pv.slice(pv.index_of(sim.start), steps),
                                        tariff.slice(tariff.consumption().index_of(sim.start), steps));
  SimulationConfig pf_cfg = cfg.simulation_config(sim.start);
  const double pf = perfect_foresight(series, pv, tariff, pf_cfg).total_cost_eur;
  CohortCell cell{household, kind, spec.training_days, mae_kw, result.total_cost_eur, nobatt, pf,
                  savings_pct(nobatt, result.total_cost_eur), std::nullopt};
  fs::create_directories(cfg.out);
  write_simulation_log(log_file, result);
  write_text(summary_file, std::string(kCohortCsvHeader) + "\n" + cohort_csv_row(cell) + "\n");
  std::cout << kCohortCsvHeader << "\n" << cohort_csv_row(cell) << "\n";
  return kExitOk;
}

int cmd_evaluate(const Common& common, const std::string& cohort_arg,
                 const std::string& weights_arg) {
  auto cfg = load_config(common);
  auto cohort = open_cohort(cohort_arg.empty() ? cfg.cohort_dir : fs::path(cohort_arg));
  fs::path global_path = weights_arg.empty() ? cfg.out / "global.hwt" : fs::path(weights_arg);
  require_file(global_path, "global weights");
  const fs::path cells_file = cfg.out / "cohort_cells.csv";
  check_outputs({cells_file}, common.force);
  auto global = load_weights(global_path);
  std::vector<HouseholdSeries> held;
  for (const auto& h : cohort.manifest.households) {
    if (h.role == "heldout") held.push_back({h.profile.id, read_csv(cohort.dir / h.file)});
  }
  if (held.empty()) throw DataError("cohort has no held-out households");
  auto pv = read_csv(cohort.dir / cohort.manifest.pv_file);
  auto tariff = load_tariff(cohort, cfg.injection_ratio);
  auto cells = evaluate_cohort(held, global, pv, tariff, cfg.cohort_config());
  fs::create_directories(cfg.out);
  write_cohort_csv(cells_file, cells);
  int failed = 0;
  for (const auto& c : cells) {
    if (c.error) {
      ++failed;
      std::cerr << "failed cell " << c.household << "/" << model_kind_name(c.kind) << "/"
                << c.training_days << ": " << *c.error << "\n";
    }
  }
  std::cout << cells.size() << " cells (" << failed << " failed) -> " << cells_file.string()
            << "\n";
  return kExitOk;
}

int cmd_report(const Common& common, const std::string& results_arg) {
  auto cfg = load_config(common);
  const fs::path results = results_arg.empty() ? cfg.out : fs::path(results_arg);
  const fs::path out = common.out.empty() ? results / "report" : fs::path(common.out);
  check_outputs({out / "cohort_report.csv", out / "cohort_summary.csv",
                 out / "mae_vs_training_days.svg", out / "cost_vs_training_days.svg"},
                common.force);
  std::vector<fs::path> inputs;
  if (fs::is_directory(results)) {
    for (const auto& e : fs::directory_iterator(results)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() &&
          (name == "cohort_cells.csv" || name.ends_with(".summary.csv"))) {
        inputs.push_back(e.path());
      }
    }
  }
  // cohort_cells.csv sorts before the summaries; its cells win over a
  // single-simulation summary of the same (household, kind, days).
  std::sort(inputs.begin(), inputs.end(), [](const fs::path& a, const fs::path& b) {
    const bool ca = a.filename() == "cohort_cells.csv", cb = b.filename() == "cohort_cells.csv";
    return ca != cb ? ca : a < b;
  });
  std::vector<CohortCell> cells;
  std::set<std::tuple<std::string, ModelKind, int>> from_cohort;
  for (const auto& p : inputs) {
    const bool cohort = p.filename() == "cohort_cells.csv";
    for (auto& c : read_cohort_csv(p)) {
      const auto key = std::make_tuple(c.household, c.kind, c.training_days);
      if (cohort) {
        from_cohort.insert(key);
      } else if (from_cohort.count(key)) {
        std::cerr << "note: " << p.filename().string() << " superseded by cohort_cells.csv\n";
        continue;
      }
      cells.push_back(std::move(c));
    }
  }
  if (cells.empty()) throw DataError("nothing to report in " + results.string());
  int missing = 0;
  for (const auto& c : cells) missing += c.error ? 1 : 0;
  write_report(out, cells);
  std::cout << cells.size() << " cells (" << missing << " marked failed) -> " << out.string()
            << "\n";
  return kExitOk;
}

int cmd_dispatch(const std::string& input, const std::string& output, const Common& common,
                 bool terminal) {
  auto cfg = load_config(common);
  require_file(input, "dispatch input");
  check_outputs({output}, common.force);
  auto in = read_dispatch_csv(input, cfg.start);
  DispatchProblem problem{in.demand, in.pv, in.tariff, cfg.battery, kStepHours, std::nullopt};
  if (terminal) problem.terminal_min_energy = cfg.battery.e_init;
  auto sol = solve_dispatch(problem);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError(std::string("dispatch LP is ") + lp_status_name(sol.status));
  }
  auto report = verify_solution(problem, sol);
  if (!report.ok()) throw SolverError("verification failed: " + report.summary());
  write_dispatch_csv(output, sol);
  std::cout << "optimal cost " << format_double(sol.cost) << " EUR -> " << output << "\n";
  return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "run configuration file (INI)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "master seed (overrides [run] seed)");
  app->add_flag("--force", c.force, "overwrite existing outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hems: day-ahead load forecasting and battery dispatch"};
  app.require_subcommand(1);

  Common common;
  std::string cohort, weights, household, results, input, output;
  std::optional<int> training_days, epochs;
  std::optional<double> lr;
  bool oracle = false, persistence = false, no_battery = false, terminal = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic household cohort");
  add_common(gen, common);

  auto* pre = app.add_subcommand("pretrain", "train the global model on the pretrain households");
  add_common(pre, common);
  pre->add_option("--cohort", cohort, "cohort directory (default [data] cohort)");
  pre->add_option("--epochs", epochs, "override [pretrain] epochs");

  auto* fine = app.add_subcommand("finetune", "finetune the global model on one household");
  auto* local = app.add_subcommand("train-local", "train a model from scratch on one household");
  for (auto* sub : {fine, local}) {
    add_common(sub, common);
    sub->add_option("--cohort", cohort, "cohort directory");
    sub->add_option("--household", household, "household id")->required();
    sub->add_option("--training-days", training_days, "training days (default [split])");
  }
  fine->add_option("--weights", weights, "global weights (default OUT/global.hwt)");
  fine->add_option("--lr", lr, "override [finetune] lr");
  fine->add_option("--epochs", epochs, "override [finetune] epochs");

  auto* sim = app.add_subcommand("simulate", "closed-loop MPC over the first test days");
  add_common(sim, common);
  sim->add_option("--cohort", cohort, "cohort directory");
  sim->add_option("--weights", weights, "model weights with a .json sidecar");
  sim->add_option("--household", household, "household id");
  sim->add_option("--training-days", training_days, "locates the test window");
  sim->add_flag("--oracle", oracle, "forecast with the actual demand");
  sim->add_flag("--persistence", persistence, "forecast with yesterday's demand");
  sim->add_flag("--no-battery", no_battery, "simulate without a battery");

  auto* eval = app.add_subcommand("evaluate", "local vs finetuned models on held-out households");
  add_common(eval, common);
  eval->add_option("--cohort", cohort, "cohort directory");
  eval->add_option("--weights", weights, "global weights (default OUT/global.hwt)");

  auto* rep = app.add_subcommand("report", "cohort CSV and SVG charts from result cells");
  add_common(rep, common);
  rep->add_option("--results", results, "directory with *.summary.csv / cohort_cells.csv");

  auto* disp = app.add_subcommand("dispatch", "solve one dispatch LP from a CSV");
  add_common(disp, common);
  disp->add_option("--input", input, "t,demand_kw,pv_kw,lambda_con,lambda_inj")->required();
  disp->add_option("--output", output, "t,u_kw,grid_kw,energy_kwh,cost_eur")->required();
  disp->add_flag("--terminal", terminal, "require E_end >= E_init");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common);
    if (pre->parsed()) return cmd_pretrain(common, cohort, epochs);
    if (fine->parsed()) {
      return cmd_train_household(common, true, cohort, household, training_days, weights, lr,
                                 epochs);
    }
    if (local->parsed()) {
      return cmd_train_household(common, false, cohort, household, training_days, weights,
                                 std::nullopt, std::nullopt);
    }
    if (sim->parsed()) {
      return cmd_simulate(common, cohort, weights, household, training_days, oracle, persistence,
                          no_battery);
    }
    if (eval->parsed()) return cmd_evaluate(common, cohort, weights);
    if (rep->parsed()) return cmd_report(common, results);
    if (disp->parsed()) return cmd_dispatch(input, output, common, terminal);
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what();
    if (e.epoch() >= 0) std::cerr << " (epoch " << e.epoch() << ")";
    std::cerr << "\n";
    return kExitTraining;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
