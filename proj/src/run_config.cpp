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

#include "hems/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hems/csv.hpp"
#include "hems/errors.hpp"
#include "hems/seeding.hpp"

namespace hems {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto f : split_fields(text)) {
    auto t = trim(f);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  auto d = parse_double(trim(v));
  if (!d || !std::isfinite(*d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

long long to_int(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  long long out = 0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int to_small_int(const std::string& key, const std::string& v) {
  auto x = to_int(key, v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["run.seed"] = [](RunConfig& c, auto& k, auto& v) {
      auto x = to_int(k, v);
      if (x < 0) throw ConfigError(k + ": must be >= 0");
      c.seed = static_cast<std::uint64_t>(x);
    };
    m["run.out"] = [](RunConfig& c, auto&, auto& v) { c.out = trim(v); };
    m["run.parallel"] = [](RunConfig& c, auto& k, auto& v) { c.parallel = to_bool(k, v); };

    m["data.cohort"] = [](RunConfig& c, auto&, auto& v) { c.cohort_dir = trim(v); };
    m["data.households"] = [](RunConfig& c, auto& k, auto& v) { c.households = to_small_int(k, v); };
    m["data.heldout"] = [](RunConfig& c, auto& k, auto& v) { c.heldout = to_small_int(k, v); };
    m["data.days"] = [](RunConfig& c, auto& k, auto& v) { c.days = to_small_int(k, v); };
    m["data.start"] = [](RunConfig& c, auto& k, auto& v) {
      try {
        c.start = parse_timestamp(trim(v));
      } catch (const Error& e) {
        throw ConfigError(k + ": " + e.what());
      }
    };
    m["data.pv_peak_kw"] = [](RunConfig& c, auto& k, auto& v) { c.pv_peak_kw = to_double(k, v); };
    m["data.injection_ratio"] = [](RunConfig& c, auto& k, auto& v) {
      c.injection_ratio = to_double(k, v);
    };

    m["model.input_window"] = [](RunConfig& c, auto& k, auto& v) {
      c.model.input_window = to_small_int(k, v);
    };
    m["model.horizon"] = [](RunConfig& c, auto& k, auto& v) { c.model.horizon = to_small_int(k, v); };
    m["model.quantiles"] = [](RunConfig& c, auto& k, auto& v) {
      c.model.quantiles.clear();
      for (const auto& q : split_list(v)) c.model.quantiles.push_back(to_double(k, q));
    };
    m["model.hidden_size"] = [](RunConfig& c, auto& k, auto& v) {
      c.model.hidden_size = to_small_int(k, v);
    };
    m["model.attention_heads"] = [](RunConfig& c, auto& k, auto& v) {
      c.model.attention_heads = to_small_int(k, v);
    };
    m["model.dropout"] = [](RunConfig& c, auto& k, auto& v) { c.model.dropout = to_double(k, v); };
    auto features = [](std::vector<CalendarFeature>& out, const std::string& v) {
      out.clear();
      for (const auto& f : split_list(v)) out.push_back(parse_feature(f));
    };
    m["model.past_covariates"] = [features](RunConfig& c, auto&, auto& v) {
      features(c.model.past_covariates, v);
    };
    m["model.future_covariates"] = [features](RunConfig& c, auto&, auto& v) {
      features(c.model.future_covariates, v);
    };

    m["pretrain.lr"] = [](RunConfig& c, auto& k, auto& v) { c.pretrain.initial_lr = to_double(k, v); };
    m["pretrain.epochs"] = [](RunConfig& c, auto& k, auto& v) { c.pretrain.epochs = to_small_int(k, v); };
    m["pretrain.batch_size"] = [](RunConfig& c, auto& k, auto& v) {
      c.pretrain.batch_size = to_small_int(k, v);
    };
    m["pretrain.patience"] = [](RunConfig& c, auto& k, auto& v) {
      c.pretrain.early_stopping_patience = to_small_int(k, v);
    };
    m["pretrain.momentum"] = [](RunConfig& c, auto& k, auto& v) { c.pretrain.momentum = to_double(k, v); };
    m["pretrain.clip_norm"] = [](RunConfig& c, auto& k, auto& v) {
      c.pretrain.clip_norm = to_double(k, v);
    };

    m["finetune.lr"] = [](RunConfig& c, auto& k, auto& v) { c.finetune_lr = to_double(k, v); };
    m["finetune.epochs"] = [](RunConfig& c, auto& k, auto& v) { c.finetune_epochs = to_small_int(k, v); };
    m["finetune.batch_size"] = [](RunConfig& c, auto& k, auto& v) {
      c.finetune_batch_size = to_small_int(k, v);
    };
    m["finetune.patience"] = [](RunConfig& c, auto& k, auto& v) {
      c.finetune_patience = to_small_int(k, v);
    };

    m["local.lr"] = [](RunConfig& c, auto& k, auto& v) { c.local_lr = to_double(k, v); };
    m["local.epochs"] = [](RunConfig& c, auto& k, auto& v) { c.local_epochs = to_small_int(k, v); };
    m["local.batch_size"] = [](RunConfig& c, auto& k, auto& v) {
      c.local_batch_size = to_small_int(k, v);
    };
    m["local.patience"] = [](RunConfig& c, auto& k, auto& v) {
      c.local_patience = to_small_int(k, v);
    };

    m["split.test_weeks"] = [](RunConfig& c, auto& k, auto& v) { c.split.test_weeks = to_small_int(k, v); };
    m["split.validation_days"] = [](RunConfig& c, auto& k, auto& v) {
      c.split.validation_days = to_small_int(k, v);
    };
    m["split.training_days"] = [](RunConfig& c, auto& k, auto& v) {
      c.split.training_days = to_small_int(k, v);
    };
    m["split.scale_before_split"] = [](RunConfig& c, auto& k, auto& v) {
      c.split.scale_before_split = to_bool(k, v);
    };
    m["split.sizes"] = [](RunConfig& c, auto& k, auto& v) {
      c.training_sizes.clear();
      for (const auto& s : split_list(v)) c.training_sizes.push_back(to_small_int(k, s));
    };

    m["simulation.days"] = [](RunConfig& c, auto& k, auto& v) { c.simulation_days = to_small_int(k, v); };
    m["simulation.e_max"] = [](RunConfig& c, auto& k, auto& v) { c.battery.e_max = to_double(k, v); };
    m["simulation.u_min"] = [](RunConfig& c, auto& k, auto& v) { c.battery.u_min = to_double(k, v); };
    m["simulation.u_max"] = [](RunConfig& c, auto& k, auto& v) { c.battery.u_max = to_double(k, v); };
    m["simulation.eta"] = [](RunConfig& c, auto& k, auto& v) { c.battery.eta = to_double(k, v); };
    m["simulation.e_init"] = [](RunConfig& c, auto& k, auto& v) { c.battery.e_init = to_double(k, v); };
    m["simulation.replan"] = [](RunConfig& c, auto& k, auto& v) {
      try {
        c.replan = parse_replan(trim(v));
      } catch (const Error& e) {
        throw ConfigError(k + ": " + e.what());
      }
    };
    m["simulation.point_quantile"] = [](RunConfig& c, auto& k, auto& v) {
      c.point_quantile = to_double(k, v);
    };
    m["simulation.terminal_soc"] = [](RunConfig& c, auto& k, auto& v) {
      c.terminal_soc = to_bool(k, v);
    };
    return m;
  }();
  return table;
}

}  // namespace

RunConfig::RunConfig() : start(parse_timestamp("2023-01-02T00:00:00Z")) {}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (out.empty()) fail("run.out: must not be empty");
  if (households < 1) fail("data.households: must be >= 1");
  if (heldout < 0 || heldout >= households) fail("data.heldout: must lie in [0, households)");
  if (days < 1) fail("data.days: must be >= 1");
  if (!is_midnight(start)) fail("data.start: must be a UTC midnight");
  if (!(pv_peak_kw >= 0.0)) fail("data.pv_peak_kw: must be >= 0");
  if (!(injection_ratio >= 0.0 && injection_ratio <= 1.0)) {
    fail("data.injection_ratio: must lie in [0, 1]");
  }
  model.validate();
  pretrain_config().validate();
  finetune_config().validate();
  local_config().validate();
  split.validate();
  if (training_sizes.empty()) fail("split.sizes: must not be empty");
  for (int s : training_sizes) {
    if (s < 1) fail("split.sizes: entries must be >= 1");
  }
  if (simulation_days < 1 || simulation_days > split.test_weeks * 7) {
    fail("simulation.days: must lie in [1, 7 * split.test_weeks]");
  }
  battery.validate();
  if (std::find_if(model.quantiles.begin(), model.quantiles.end(), [&](double q) {
        return std::abs(q - point_quantile) < 1e-12;
      }) == model.quantiles.end()) {
    fail("simulation.point_quantile: must be one of model.quantiles");
  }
}

TrainConfig RunConfig::pretrain_config() const {
  TrainConfig t = pretrain;
  t.seed = derive_seed(seed, "pretrain");
  t.policy = policy();
  return t;
}

TrainConfig RunConfig::finetune_config() const {
  TrainConfig t = default_finetune_config(pretrain_config());
  if (finetune_lr) t.initial_lr = *finetune_lr;
  if (finetune_epochs) t.epochs = *finetune_epochs;
  if (finetune_batch_size) t.batch_size = *finetune_batch_size;
  if (finetune_patience) t.early_stopping_patience = *finetune_patience;
  if (!finetune_patience && t.early_stopping_patience > t.epochs) {
    t.early_stopping_patience = std::max(1, t.epochs);
  }
  t.seed = derive_seed(seed, "finetune");
  return t;
}

TrainConfig RunConfig::local_config() const {
  TrainConfig t = pretrain_config();
  if (local_lr) t.initial_lr = *local_lr;
  if (local_epochs) t.epochs = *local_epochs;
  if (local_batch_size) t.batch_size = *local_batch_size;
  if (local_patience) t.early_stopping_patience = *local_patience;
  if (!local_patience && t.early_stopping_patience > t.epochs) {
    t.early_stopping_patience = std::max(1, t.epochs);
  }
  t.seed = derive_seed(seed, "local");
  return t;
}

SimulationConfig RunConfig::simulation_config(Timestamp period_start) const {
  SimulationConfig s;
  s.start = period_start;
  s.steps = simulation_days * kStepsPerDay;
  s.battery = battery;
  s.replan = replan;
  s.point_quantile = point_quantile;
  s.terminal_soc = terminal_soc;
  return s;
}

CohortConfig RunConfig::cohort_config() const {
  CohortConfig c;
  c.training_sizes = training_sizes;
  c.split = split;
  c.pretrain = pretrain_config();
  c.finetune = finetune_config();
  c.local = local_config();
  c.simulation = simulation_config(start);
  c.seed = derive_seed(seed, "cohort");
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  // property_tree only knows ';' comments.
  std::istringstream lines(text);
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(lines, line)) {
    auto t = trim(line);
    cleaned << (t.starts_with('#') ? "" : line) << '\n';
  }
  pt::ptree tree;
  try {
    std::istringstream in(cleaned.str());
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError(origin + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      auto it = table.find(full);
      if (it == table.end()) throw ConfigError(origin + ": unknown key '" + full + "'");
      try {
        it->second(cfg, full, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

}  // namespace hems
