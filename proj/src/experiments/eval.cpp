#include "mmvlamp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/feedback.hpp"
#include "mmvlamp/frontend.hpp"
#include "mmvlamp/rng.hpp"

namespace mmv {
namespace {

enum : std::uint64_t { kChannels = 101, kEvalNoise = 102, kEvalPhases = 103, kEvalOmega = 104 };

const std::set<std::string> kEstimationSchemes{"somp", "mmv-amp", "mmv-lamp-trained", "mmv-lamp-untrained"};
const std::set<std::string> kFeedbackSchemes{"fcrn", "fcrn-untrained", "somp-feedback", "crn-direct"};

std::string seed_str(std::uint64_t s) { return std::to_string(s); }

void check_checkpoint(const Checkpoint& ck, const SystemConfig& sys) {
  if (ck.n_bs != sys.n_bs || ck.m != sys.m() || ck.g != sys.g) {
    throw ConfigError("checkpoint dimensions (N_BS=" + std::to_string(ck.n_bs) + ", M=" + std::to_string(ck.m) +
                      ", G=" + std::to_string(ck.g) + ") do not match the configuration");
  }
  if (ck.crn.link != sys.link) throw ConfigError("checkpoint link mode does not match the configuration");
}

// Applies `solve` to interleaved column groups of width `group` and
// reassembles the estimate.
template <class Solve>
CMatrix grouped(const CMatrix& y, std::size_t group, std::size_t n_bs, Solve&& solve) {
  if (y.cols() == group) return solve(y);
  const std::size_t stride = y.cols() / group;
  CMatrix out(n_bs, y.cols());
  std::vector<std::size_t> cols(group);
  for (std::size_t s = 0; s < stride; ++s) {
    for (std::size_t i = 0; i < group; ++i) cols[i] = s + stride * i;
    const CMatrix part = solve(y.select_cols(cols));
    for (std::size_t i = 0; i < group; ++i)
      for (std::size_t n = 0; n < n_bs; ++n) out(n, cols[i]) = part(n, i);
  }
  return out;
}

struct Aggregate {
  double sum = 0.0;
  std::size_t n = 0;
};

}  // namespace

double ratio_to_db(double ratio) {
  if (!(ratio > 0.0)) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(ratio));
}

double nmse_ratio(std::span<const CMatrix> estimate, std::span<const CMatrix> truth) {
  if (truth.empty() || estimate.size() != truth.size()) throw ParameterError("nmse: need matched nonempty sets");
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i].frobenius_sq();
    if (!(e > 0.0)) throw DegenerateInputError("nmse: zero-norm true channel at index " + std::to_string(i));
    acc += (truth[i] - estimate[i]).frobenius_sq() / e;
  }
  return acc / static_cast<double>(truth.size());
}

double nmse_db(std::span<const CMatrix> estimate, std::span<const CMatrix> truth) {
  return ratio_to_db(nmse_ratio(estimate, truth));
}

ChannelSet generate_channels(const SystemConfig& sys, std::size_t count, std::uint64_t seed, GridMode mode,
                             const FseConfig& fse, std::uint64_t stream) {
  ChannelSet out(count);
  FseScene scene = default_fse_scene();
  scene.gs_db = fse.gs_db;
#pragma omp parallel for schedule(static) firstprivate(scene)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    Rng rng = make_rng(seed, {kChannels, stream, static_cast<std::uint64_t>(i)});
    if (mode == GridMode::fse) {
      scene.user = sample_user(fse.region, rng);
      out[static_cast<std::size_t>(i)] = frequency_channel(fse_channel(scene, sys, rng), sys);
    } else {
      out[static_cast<std::size_t>(i)] = random_channel(sys, rng, mode);
    }
  }
  return out;
}

std::vector<CsvRow> run_eval(const ExperimentConfig& cfg, const Checkpoint* ck) {
  const EvalConfig& ev = cfg.eval;
  static const std::set<std::string> axes{"snr", "paths", "subcarriers", "phase-bits", "adc-bits"};
  if (!axes.count(ev.sweep_axis)) throw ConfigError("eval: unknown sweep axis '" + ev.sweep_axis + "'");
  bool needs_model = false;
  for (const auto& s : ev.schemes) {
    if (!kEstimationSchemes.count(s)) throw ConfigError("eval: unknown scheme '" + s + "'");
    needs_model = needs_model || s == "mmv-lamp-trained" || s == "mmv-lamp-untrained";
  }
  if (needs_model && !ck) throw ConfigError("eval: trained schemes need --checkpoint");
  if (ck) check_checkpoint(*ck, cfg.system);

  const SystemConfig& base = cfg.system;
  const Dictionary dict = build_redundant_dictionary(base.n_bs, base.g);
  std::vector<CsvRow> rows;
  std::map<std::pair<std::size_t, std::string>, Aggregate> agg;

  for (std::size_t vi = 0; vi < ev.sweep_values.size(); ++vi) {
    const double value = ev.sweep_values[vi];
    SystemConfig sys = base;
    double snr = ev.snr_db;
    int phase_bits = 0;
    int adc_bits = 0;
    if (value < 0.0 && ev.sweep_axis != "snr") throw ConfigError("eval: negative sweep value");
    const auto as_count = [&] { return static_cast<std::size_t>(std::llround(value)); };
    if (ev.sweep_axis == "snr") snr = value;
    if (ev.sweep_axis == "paths") sys.l = as_count();
    if (ev.sweep_axis == "subcarriers") sys.k = as_count();
    if (ev.sweep_axis == "phase-bits") phase_bits = static_cast<int>(as_count());
    if (ev.sweep_axis == "adc-bits") adc_bits = static_cast<int>(as_count());
    if (sys.l == 0 || sys.k == 0) throw ConfigError("eval: sweep value must be positive");
    if (sys.k % base.k != 0) throw ConfigError("eval: subcarrier count must be a multiple of system.k");
    const CMatrix u = adc_bits > 0 ? build_dft(sys.k) : CMatrix();

    for (const std::uint64_t seed : ev.seeds) {
      const ChannelSet test = generate_channels(sys, ev.test_count, seed, ev.grid, cfg.fse, kTestStream);
      Rng phase_rng = make_rng(seed, {kEvalPhases});
      const CMatrix random_xi = random_phases(sys.n_bs, sys.m(), phase_rng);

      for (const std::string& scheme : ev.schemes) {
        const bool trained = scheme == "mmv-lamp-trained" || scheme == "mmv-lamp-untrained";
        CMatrix xi = trained ? ck->crn.xi : random_xi;
        if (phase_bits > 0) xi = quantize_phases(xi, phase_bits);
        const CMatrix f = phases_to_combiner(xi);
        const CMatrix a = effective_matrix(f, dict, sys.link);
        const LampParams params = scheme == "mmv-lamp-trained" ? ck->crn.lamp : LampParams::untrained(a);
        const std::size_t layers = trained ? ck->layers : sys.layers;
        const std::size_t support = std::min(ev.somp_support > 0 ? ev.somp_support : sys.l, sys.m());

        std::vector<double> ratio(test.size());
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(test.size()); ++i) {
          const auto s = static_cast<std::size_t>(i);
          Rng rng = make_rng(seed, {kEvalNoise, s});
          CMatrix y = measure(f, test[s], snr, rng, sys.link).y;
          if (adc_bits > 0) y = adc_quantize(y, adc_bits, u);
          const CMatrix est = grouped(y, base.k, sys.n_bs, [&](const CMatrix& yg) {
            if (scheme == "somp") return matmul(dict.dh, somp_run(yg, a, support).x_hat);
            return matmul(dict.dh, mmv_lamp_run(yg, a, params, layers).output());
          });
          ratio[s] = (est - test[s]).frobenius_sq() / test[s].frobenius_sq();
        }
        double mean = 0.0;
        for (double r : ratio) mean += r;
        mean /= static_cast<double>(ratio.size());
        rows.push_back({ev.sweep_axis, value, scheme, seed_str(seed), ratio_to_db(mean)});
        auto& a_ = agg[{vi, scheme}];
        a_.sum += mean;
        ++a_.n;
      }
    }
  }
  for (const auto& [key, a] : agg) {
    rows.push_back({ev.sweep_axis, ev.sweep_values[key.first], key.second, "mean", ratio_to_db(a.sum / a.n)});
  }
  return rows;
}

std::vector<CsvRow> run_feedback_eval(const ExperimentConfig& cfg, const Checkpoint* ck) {
  const EvalConfig& ev = cfg.eval;
  if (ev.sweep_axis != "feedback-ratio") throw ConfigError("feedback-eval: sweep axis must be feedback-ratio");
  bool needs_model = false;
  for (const auto& s : ev.schemes) {
    if (!kFeedbackSchemes.count(s)) throw ConfigError("feedback-eval: unknown scheme '" + s + "'");
    needs_model = needs_model || s != "somp-feedback";
  }
  if (needs_model && !ck) throw ConfigError("feedback-eval: CRN-based schemes need --checkpoint");
  const SystemConfig& sys = cfg.system;
  if (sys.link != LinkMode::downlink) throw ConfigError("feedback-eval: feedback is a downlink procedure");
  if (ck) check_checkpoint(*ck, sys);

  const Dictionary dict = build_redundant_dictionary(sys.n_bs, sys.g);
  const CMatrix u = build_dft(sys.k);
  std::vector<CsvRow> rows;
  std::map<std::pair<std::size_t, std::string>, Aggregate> agg;

  for (std::size_t vi = 0; vi < ev.sweep_values.size(); ++vi) {
    const double rho = ev.sweep_values[vi];
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("feedback-eval: ratio must be in (0, 1]");
    const std::size_t k_c = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rho * sys.k)));
    Rng omega_rng = make_rng(cfg.feedback.omega_seed, {kEvalOmega, vi});
    const std::vector<std::size_t> drawn = select_subcarriers(sys.k, k_c, omega_rng);

    for (const std::uint64_t seed : ev.seeds) {
      const ChannelSet test = generate_channels(sys, ev.test_count, seed, ev.grid, cfg.fse, kTestStream);
      Rng phase_rng = make_rng(seed, {kEvalPhases});
      const CMatrix random_xi = random_phases(sys.n_bs, sys.m(), phase_rng);

      for (const std::string& scheme : ev.schemes) {
        const bool uses_model = scheme != "somp-feedback";
        const CMatrix f = phases_to_combiner(uses_model ? ck->crn.xi : random_xi);
        const CMatrix a = effective_matrix(f, dict, sys.link);
        std::vector<std::size_t> omega = drawn;
        LampParams frsn;
        if (scheme == "fcrn") {
          if (!ck->frsn) throw ConfigError("feedback-eval: checkpoint has no trained FRSN");
          if (ck->frsn->omega.size() != k_c) {
            throw ConfigError("feedback-eval: trained FRSN has K_c=" + std::to_string(ck->frsn->omega.size()) +
                              ", ratio asks for " + std::to_string(k_c));
          }
          omega = ck->frsn->omega;
          frsn = ck->frsn->lamp;
        }
        const CMatrix u_tilde = partial_dft(u, omega);
        if (scheme == "fcrn-untrained") frsn = LampParams::untrained(u_tilde);
        const std::size_t delay_support =
            std::min(k_c, cfg.feedback.delay_support > 0 ? cfg.feedback.delay_support : std::max<std::size_t>(1, k_c / 2));
        const std::size_t angle_support = std::min(sys.l, sys.m());
        const std::size_t crn_layers = ck ? ck->layers : sys.layers;
        const std::size_t frsn_layers = ck && ck->frsn_layers > 0 ? ck->frsn_layers : sys.frsn_layers;

        std::vector<double> ratio(test.size());
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(test.size()); ++i) {
          const auto s = static_cast<std::size_t>(i);
          Rng rng = make_rng(seed, {kEvalNoise, s});
          const CMatrix y = measure(f, test[s], ev.snr_db, rng, LinkMode::downlink).y;
          CMatrix est;
          if (scheme == "crn-direct") {
            est = matmul(dict.dh, mmv_lamp_run(y, a, ck->crn.lamp, crn_layers).output());
          } else {
            const FeedbackBundle fb = compress_feedback(y, omega);
            if (scheme == "somp-feedback")
              est = somp_feedback(fb.y_tilde, u_tilde, u, a, dict.dh, delay_support, angle_support);
            else
              est = fcrn_pipeline(fb.y_tilde, u_tilde, u, frsn, ck->crn.lamp, a, dict.dh, frsn_layers, crn_layers);
          }
          ratio[s] = (est - test[s]).frobenius_sq() / test[s].frobenius_sq();
        }
        double mean = 0.0;
        for (double r : ratio) mean += r;
        mean /= static_cast<double>(ratio.size());
        rows.push_back({ev.sweep_axis, rho, scheme, seed_str(seed), ratio_to_db(mean)});
        auto& a_ = agg[{vi, scheme}];
        a_.sum += mean;
        ++a_.n;
      }
    }
  }
  for (const auto& [key, a] : agg) {
    rows.push_back({ev.sweep_axis, ev.sweep_values[key.first], key.second, "mean", ratio_to_db(a.sum / a.n)});
  }
  return rows;
}

std::string to_csv(std::vector<CsvRow> rows) {
  const auto seed_key = [](const std::string& s) {
    return s == "mean" ? std::pair<int, unsigned long long>{1, 0} : std::pair<int, unsigned long long>{0, std::stoull(s)};
  };
  std::sort(rows.begin(), rows.end(), [&](const CsvRow& a, const CsvRow& b) {
    return std::tie(a.sweep_axis, a.sweep_value, a.scheme) < std::tie(b.sweep_axis, b.sweep_value, b.scheme) ||
           (std::tie(a.sweep_axis, a.sweep_value, a.scheme) == std::tie(b.sweep_axis, b.sweep_value, b.scheme) &&
            seed_key(a.seed) < seed_key(b.seed));
  });
  std::string out = "sweep_axis,sweep_value,scheme,seed,nmse_db\n";
  char buf[64];
  for (const CsvRow& r : rows) {
    out += r.sweep_axis;
    std::snprintf(buf, sizeof buf, ",%.10g,", r.sweep_value);
    out += buf;
    out += r.scheme + "," + r.seed;
    std::snprintf(buf, sizeof buf, ",%.4f\n", r.nmse_db);
    out += buf;
  }
  return out;
}

}  // namespace mmv
