#include "mmvlamp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/eval.hpp"
#include "mmvlamp/frontend.hpp"

namespace mmv {
namespace {

enum : std::uint64_t { kOmegaStream = 201 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string checkpoint;
};

ExperimentConfig config_from(const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
  if (opt.seed) cfg.train.seed = *opt.seed;
  return cfg;
}

ChannelSet training_channels(const ExperimentConfig& cfg) {
  const SystemConfig& sys = cfg.system;
  if (cfg.dataset.path.empty()) {
    return generate_channels(sys, cfg.dataset.count, cfg.train.seed, cfg.dataset.grid, cfg.fse);
  }
  Dataset ds = load_dataset(cfg.dataset.path);
  if (ds.header.n_bs != sys.n_bs || ds.header.k != sys.k) {
    throw ConfigError("dataset " + cfg.dataset.path + " has N_BS=" + std::to_string(ds.header.n_bs) +
                      ", K=" + std::to_string(ds.header.k) + "; configuration disagrees");
  }
  return std::move(ds.samples);
}

std::pair<ChannelSet, ChannelSet> split(ChannelSet all, double fraction) {
  if (all.size() < 2) throw ConfigError("training needs at least 2 channels");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("dataset.validation_fraction must be in (0, 1)");
  std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(all.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, all.size() - 1);
  ChannelSet val(std::make_move_iterator(all.end() - static_cast<std::ptrdiff_t>(n_val)),
                 std::make_move_iterator(all.end()));
  all.resize(all.size() - n_val);
  return {std::move(all), std::move(val)};
}

void write_dataset(const ExperimentConfig& cfg, GridMode mode, std::uint64_t seed, const std::string& path) {
  Dataset ds;
  ds.samples = generate_channels(cfg.system, cfg.dataset.count, seed, mode, cfg.fse);
  for (auto& s : ds.samples) s = round_to_storage(s);
  ds.header.count = static_cast<std::uint32_t>(ds.samples.size());
  ds.header.n_bs = static_cast<std::uint32_t>(cfg.system.n_bs);
  ds.header.k = static_cast<std::uint32_t>(cfg.system.k);
  ds.header.l = mode == GridMode::fse ? static_cast<std::uint32_t>(1 + default_fse_scene().scatterers.size())
                                      : static_cast<std::uint32_t>(cfg.system.l);
  ds.header.grid_mode = mode;
  ds.header.seed = seed;
  save_dataset(path, ds);
}

void emit_csv(const std::vector<CsvRow>& rows, const std::string& path, std::ostream& out) {
  const std::string csv = to_csv(rows);
  if (path.empty()) {
    out << csv;
    return;
  }
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-driven mmWave channel estimation and feedback"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Options opt;
  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "flat key = value configuration file");
    if (config_required) c->required();
    sub->add_option("--seed", opt.seed, "master seed");
  };

  auto* gen = app.add_subcommand("generate-dataset", "sample random-scatterer channels into a dataset file");
  add_common(gen, false);
  gen->add_option("--output", opt.output, "dataset path")->required();
  auto* fse = app.add_subcommand("fse-generate", "sample fixed-scattering-environment channels");
  add_common(fse, false);
  fse->add_option("--output", opt.output, "dataset path")->required();
  auto* train = app.add_subcommand("train", "layer-by-layer training of encoder and decoder");
  add_common(train, true);
  train->add_option("--output", opt.output, "checkpoint path")->required();
  auto* frsn = app.add_subcommand("train-frsn", "train the feedback reconstruction network");
  add_common(frsn, true);
  frsn->add_option("--checkpoint", opt.checkpoint, "trained CRN checkpoint")->required();
  frsn->add_option("--output", opt.output, "checkpoint path")->required();
  auto* eval = app.add_subcommand("eval", "NMSE sweep for the estimation schemes");
  add_common(eval, true);
  eval->add_option("--checkpoint", opt.checkpoint, "trained checkpoint");
  eval->add_option("--output", opt.output, "CSV path (stdout if omitted)");
  auto* feval = app.add_subcommand("feedback-eval", "NMSE sweep over the feedback ratio");
  add_common(feval, true);
  feval->add_option("--checkpoint", opt.checkpoint, "trained checkpoint");
  feval->add_option("--output", opt.output, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = config_from(opt);
    const SystemConfig& sys = cfg.system;
    if (const std::string warn = sys.validate(); !warn.empty()) err << "warning: " << warn << "\n";
    cfg.train.log = [&err](const std::string& line) { err << line << "\n"; };

    if (gen->parsed() || fse->parsed()) {
      const std::uint64_t seed = opt.seed.value_or(cfg.train.seed);
      write_dataset(cfg, fse->parsed() ? GridMode::fse : cfg.dataset.grid, seed, opt.output);
    } else if (train->parsed()) {
      auto [train_set, val_set] = split(training_channels(cfg), cfg.dataset.validation_fraction);
      const Dictionary dict = build_redundant_dictionary(sys.n_bs, sys.g);
      CrnModel model = initial_crn(sys, dict, cfg.train.seed);
      train_layerwise(model, train_set, val_set, sys, cfg.train, dict);
      Checkpoint ck;
      ck.n_bs = static_cast<std::uint32_t>(sys.n_bs);
      ck.m = static_cast<std::uint32_t>(sys.m());
      ck.g = static_cast<std::uint32_t>(sys.g);
      ck.k = static_cast<std::uint32_t>(sys.k);
      ck.layers = static_cast<std::uint32_t>(sys.layers);
      ck.frsn_layers = static_cast<std::uint32_t>(sys.frsn_layers);
      ck.crn = std::move(model);
      save_checkpoint(opt.output, ck);
    } else if (frsn->parsed()) {
      Checkpoint ck = load_checkpoint(opt.checkpoint);
      if (ck.n_bs != sys.n_bs || ck.m != sys.m() || ck.k != sys.k) {
        throw ConfigError("checkpoint dimensions do not match the configuration");
      }
      if (sys.link != LinkMode::downlink) throw ConfigError("train-frsn: feedback is a downlink procedure");
      auto [train_set, val_set] = split(training_channels(cfg), cfg.dataset.validation_fraction);
      const CMatrix u = build_dft(sys.k);
      Rng omega_rng = make_rng(cfg.feedback.omega_seed, {kOmegaStream});
      FrsnModel model = initial_frsn(select_subcarriers(sys.k, sys.k_c, omega_rng), u);
      train_frsn(model, train_set, val_set, sys, cfg.train, phases_to_combiner(ck.crn.xi), u);
      ck.frsn = std::move(model);
      ck.frsn_layers = static_cast<std::uint32_t>(sys.frsn_layers);
      save_checkpoint(opt.output, ck);
    } else if (eval->parsed() || feval->parsed()) {
      std::optional<Checkpoint> ck;
      if (!opt.checkpoint.empty()) ck = load_checkpoint(opt.checkpoint);
      const Checkpoint* p = ck ? &*ck : nullptr;
      emit_csv(eval->parsed() ? run_eval(cfg, p) : run_feedback_eval(cfg, p), opt.output, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mmv
