#include "mmvlamp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mmvlamp/errors.hpp"

namespace mmv {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

template <class T>
Setter count(T ExperimentConfig::*section, std::size_t T::*field) {
  return [=](ExperimentConfig& c, const std::string& v) { (c.*section).*field = parse_number<std::size_t>(v); };
}
template <class T>
Setter real(T ExperimentConfig::*section, double T::*field) {
  return [=](ExperimentConfig& c, const std::string& v) { (c.*section).*field = parse_number<double>(v); };
}

const std::map<std::string, Setter>& setters() {
  using E = ExperimentConfig;
  static const std::map<std::string, Setter> table = {
      {"system.n_bs", count(&E::system, &SystemConfig::n_bs)},
      {"system.n_rf", count(&E::system, &SystemConfig::n_rf)},
      {"system.k", count(&E::system, &SystemConfig::k)},
      {"system.q", count(&E::system, &SystemConfig::q)},
      {"system.g", count(&E::system, &SystemConfig::g)},
      {"system.l", count(&E::system, &SystemConfig::l)},
      {"system.fs", real(&E::system, &SystemConfig::fs)},
      {"system.carrier", real(&E::system, &SystemConfig::carrier)},
      {"system.layers", count(&E::system, &SystemConfig::layers)},
      {"system.frsn_layers", count(&E::system, &SystemConfig::frsn_layers)},
      {"system.k_c", count(&E::system, &SystemConfig::k_c)},
      {"system.link",
       [](E& c, const std::string& v) {
         if (v == "uplink")
           c.system.link = LinkMode::uplink;
         else if (v == "downlink")
           c.system.link = LinkMode::downlink;
         else
           throw ConfigError("link must be uplink or downlink");
       }},
      {"train.lr", real(&E::train, &TrainConfig::lr)},
      {"train.batch", count(&E::train, &TrainConfig::batch)},
      {"train.epochs", count(&E::train, &TrainConfig::epochs)},
      {"train.patience", count(&E::train, &TrainConfig::patience)},
      {"train.seed", [](E& c, const std::string& v) { c.train.seed = parse_number<std::uint64_t>(v); }},
      {"train.snr_db",
       [](E& c, const std::string& v) {
         c.train.snr_db.clear();
         for (const auto& s : split_list(v)) c.train.snr_db.push_back(parse_number<double>(s));
       }},
      {"train.differentiate_onsager", [](E& c, const std::string& v) { c.train.differentiate_onsager = parse_bool(v); }},
      {"train.parallel", [](E& c, const std::string& v) { c.train.parallel = parse_bool(v); }},
      {"train.stage_epochs",
       [](E& c, const std::string& v) {
         c.train.stage_epochs.clear();
         for (const auto& s : split_list(v)) c.train.stage_epochs.push_back(parse_number<std::size_t>(s));
       }},
      {"dataset.count", count(&E::dataset, &DatasetConfig::count)},
      {"dataset.grid", [](E& c, const std::string& v) { c.dataset.grid = parse_grid_mode(v); }},
      {"dataset.path", [](E& c, const std::string& v) { c.dataset.path = v; }},
      {"dataset.validation_fraction", real(&E::dataset, &DatasetConfig::validation_fraction)},
      {"eval.schemes", [](E& c, const std::string& v) { c.eval.schemes = split_list(v); }},
      {"eval.sweep_axis", [](E& c, const std::string& v) { c.eval.sweep_axis = v; }},
      {"eval.sweep_values",
       [](E& c, const std::string& v) {
         c.eval.sweep_values.clear();
         for (const auto& s : split_list(v)) c.eval.sweep_values.push_back(parse_number<double>(s));
       }},
      {"eval.seeds",
       [](E& c, const std::string& v) {
         c.eval.seeds.clear();
         for (const auto& s : split_list(v)) c.eval.seeds.push_back(parse_number<std::uint64_t>(s));
       }},
      {"eval.test_count", count(&E::eval, &EvalConfig::test_count)},
      {"eval.snr_db", real(&E::eval, &EvalConfig::snr_db)},
      {"eval.grid", [](E& c, const std::string& v) { c.eval.grid = parse_grid_mode(v); }},
      {"eval.somp_support", count(&E::eval, &EvalConfig::somp_support)},
      {"fse.gs_db", real(&E::fse, &FseConfig::gs_db)},
      {"fse.region",
       [](E& c, const std::string& v) {
         const auto parts = split_list(v);
         if (parts.size() != 4) throw ConfigError("fse.region needs x0,y0,x1,y1");
         c.fse.region.lo = {parse_number<double>(parts[0]), parse_number<double>(parts[1])};
         c.fse.region.hi = {parse_number<double>(parts[2]), parse_number<double>(parts[3])};
       }},
      {"feedback.delay_support", count(&E::feedback, &FeedbackConfig::delay_support)},
      {"feedback.omega_seed",
       [](E& c, const std::string& v) { c.feedback.omega_seed = parse_number<std::uint64_t>(v); }},
  };
  return table;
}

}  // namespace

GridMode parse_grid_mode(const std::string& s) {
  if (s == "on" || s == "on-grid") return GridMode::on_grid;
  if (s == "off" || s == "off-grid") return GridMode::off_grid;
  if (s == "fse") return GridMode::fse;
  throw ConfigError("grid mode must be on, off or fse, got '" + s + "'");
}

const char* grid_mode_name(GridMode mode) {
  switch (mode) {
    case GridMode::on_grid: return "on";
    case GridMode::off_grid: return "off";
    case GridMode::fse: return "fse";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  if (cfg.eval.schemes.empty()) throw ConfigError("config: eval.schemes is empty");
  if (cfg.eval.sweep_values.empty()) throw ConfigError("config: eval.sweep_values is empty");
  if (cfg.eval.seeds.empty()) throw ConfigError("config: eval.seeds is empty");
  try {
    cfg.system.validate();
    cfg.train.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mmv
