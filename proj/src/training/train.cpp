#include <cmath>
#include <cstdio>
#include <numeric>

#include "mmvlamp/errors.hpp"
#include "mmvlamp/frontend.hpp"
#include "mmvlamp/graph.hpp"
#include "mmvlamp/rng.hpp"
#include "mmvlamp/training.hpp"

namespace mmv {
namespace {

// Stream tags for derive_seed.
enum : std::uint64_t { kShuffle = 1, kTrainNoise = 2, kValidationNoise = 3, kInitPhases = 4 };

struct BatchResult {
  double loss = 0.0;
  std::vector<double> grad;
};

class Trainable {
 public:
  virtual ~Trainable() = default;
  virtual std::vector<double> pack() const = 0;
  // Writes the flat vector back, wrapping phases and flooring theta1.
  virtual void unpack(std::span<const double> flat) = 0;
  virtual BatchResult batch(std::span<const std::size_t> idx, std::size_t layers, std::uint64_t stage,
                            std::uint64_t epoch, std::uint64_t batch) = 0;
  virtual double validate(std::size_t layers) = 0;
  virtual std::string describe() const = 0;
};

void append_complex(std::vector<double>& out, const CMatrix& m) {
  for (const auto& v : m.data()) {
    out.push_back(v.real());
    out.push_back(v.imag());
  }
}

std::size_t read_complex(std::span<const double> flat, std::size_t pos, CMatrix& m) {
  for (auto& v : m.data()) {
    v = {flat[pos], flat[pos + 1]};
    pos += 2;
  }
  return pos;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

TrainReport run_stages(Trainable& problem, std::size_t train_count, std::size_t stages, const TrainConfig& cfg,
                       const char* name) {
  cfg.validate();
  if (train_count == 0) throw ParameterError(std::string(name) + ": empty training set");
  const AdamConfig adam{cfg.lr};
  TrainReport report;
  std::vector<std::size_t> order(train_count);
  for (std::size_t t = 1; t <= stages; ++t) {
    const std::size_t epochs = t <= cfg.stage_epochs.size() ? cfg.stage_epochs[t - 1] : cfg.epochs;
    StageReport sr;
    sr.stage = t;
    sr.initial_validation = problem.validate(t);
    std::vector<double> best = problem.pack();
    double best_val = sr.initial_validation;
    std::size_t stagnant = 0;
    AdamState state;
    for (std::size_t e = 0; e < epochs; ++e) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng shuffle = make_rng(cfg.seed, {kShuffle, t, e});
      for (std::size_t i = train_count; i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle, i)]);

      for (std::size_t start = 0, b = 0; start < train_count; start += cfg.batch, ++b) {
        const std::size_t len = std::min(cfg.batch, train_count - start);
        BatchResult br = problem.batch(std::span(order).subspan(start, len), t, t, e, b);
        if (!std::isfinite(br.loss)) {
          throw TrainingError(fmt("%s: non-finite loss at stage %zu, epoch %zu, batch %zu; ", name, t, e, b) +
                              problem.describe());
        }
        std::vector<double> flat = problem.pack();
        adam_step(flat, br.grad, state, adam);
        problem.unpack(flat);
      }
      ++sr.epochs_run;
      const double val = problem.validate(t);
      if (!std::isfinite(val)) {
        throw TrainingError(fmt("%s: non-finite validation NMSE at stage %zu, epoch %zu; ", name, t, e) + problem.describe());
      }
      if (val < best_val) {
        best_val = val;
        best = problem.pack();
        stagnant = 0;
      } else if (++stagnant >= cfg.patience) {
        break;
      }
    }
    problem.unpack(best);
    sr.final_validation = best_val;
    report.stages.push_back(sr);
    if (cfg.log) {
      cfg.log(fmt("%s stage %zu: %zu epochs, validation NMSE %.3f dB -> %.3f dB", name, t, sr.epochs_run,
                  10.0 * std::log10(sr.initial_validation), 10.0 * std::log10(sr.final_validation)));
    }
  }
  return report;
}

double pick_snr(std::span<const double> snr_list, Rng& rng) {
  return snr_list.size() == 1 ? snr_list[0] : snr_list[uniform_index(rng, snr_list.size())];
}

class CrnProblem final : public Trainable {
 public:
  CrnProblem(CrnModel& model, const ChannelSet& train, const ChannelSet& val, const TrainConfig& cfg,
             const Dictionary& dict)
      : model_(model), train_(train), val_(val), cfg_(cfg), dict_(dict) {}

  std::vector<double> pack() const override {
    std::vector<double> out;
    out.reserve(model_.xi.size() + 2 * model_.lamp.b.size() + 2);
    for (const auto& v : model_.xi.data()) out.push_back(v.real());
    append_complex(out, model_.lamp.b);
    out.push_back(model_.lamp.theta1);
    out.push_back(model_.lamp.theta2);
    return out;
  }

  void unpack(std::span<const double> flat) override {
    std::size_t pos = 0;
    for (auto& v : model_.xi.data()) v = flat[pos++];
    wrap_phases(model_.xi);
    pos = read_complex(flat, pos, model_.lamp.b);
    model_.lamp.theta1 = std::max(flat[pos], kTheta1Floor);
    model_.lamp.theta2 = flat[pos + 1];
  }

  BatchResult batch(std::span<const std::size_t> idx, std::size_t layers, std::uint64_t stage, std::uint64_t epoch,
                    std::uint64_t batch) override {
    const CMatrix f = phases_to_combiner(model_.xi);
    std::vector<CMatrix> h;
    std::vector<CMatrix> noise;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Rng rng = make_rng(cfg_.seed, {kTrainNoise, stage, epoch, batch, i});
      const CMatrix& hi = train_[idx[i]];
      const double snr = pick_snr(cfg_.snr_db, rng);
      const CMatrix clean = project(f, hi, model_.link);
      h.push_back(hi);
      noise.push_back(complex_normal_matrix(rng, clean.rows(), clean.cols(), noise_variance_for(clean, snr)));
    }
    GraphOptions opt;
    opt.differentiate_onsager = cfg_.differentiate_onsager;
    const CrnBatchGradient g =
        crn_batch_gradient(model_.xi, model_.lamp, h, noise, dict_, layers, model_.link, opt, nullptr, cfg_.parallel);
    BatchResult out;
    out.loss = g.loss;
    out.grad.reserve(model_.xi.size() + 2 * g.g_b.size() + 2);
    for (const auto& v : g.g_xi.data()) out.grad.push_back(v.real());
    append_complex(out.grad, g.g_b);
    out.grad.push_back(g.g_theta1);
    out.grad.push_back(g.g_theta2);
    return out;
  }

  double validate(std::size_t layers) override {
    return crn_validation_nmse(model_, val_, dict_, layers, cfg_.snr_db, cfg_.seed, cfg_.parallel);
  }

  std::string describe() const override {
    return fmt("||Xi||=%.4g ||B||=%.4g theta1=%.4g theta2=%.4g", model_.xi.frobenius(), model_.lamp.b.frobenius(),
               model_.lamp.theta1, model_.lamp.theta2);
  }

 private:
  CrnModel& model_;
  const ChannelSet& train_;
  const ChannelSet& val_;
  const TrainConfig& cfg_;
  const Dictionary& dict_;
};

// Fed-back measurement Y~ (rows Omega of Y^T) and the noiseless target
// H_freq = (F^T H)^T for one channel.
std::pair<CMatrix, CMatrix> frsn_sample(const CMatrix& f, const CMatrix& h, std::span<const std::size_t> omega,
                                        std::span<const double> snr_list, Rng& rng) {
  const double snr = pick_snr(snr_list, rng);
  const Measurement meas = measure(f, h, snr, rng, LinkMode::downlink);
  std::vector<std::size_t> rows(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) rows[i] = omega[i] - 1;
  return {meas.y.transpose().select_rows(rows), project(f, h, LinkMode::downlink).transpose()};
}

class FrsnProblem final : public Trainable {
 public:
  FrsnProblem(FrsnModel& model, const ChannelSet& train, const ChannelSet& val, const TrainConfig& cfg,
              const CMatrix& f, const CMatrix& u)
      : model_(model), train_(train), val_(val), cfg_(cfg), f_(f), u_(u), u_tilde_(partial_dft(u, model.omega)) {}

  std::vector<double> pack() const override {
    std::vector<double> out;
    append_complex(out, model_.lamp.b);
    out.push_back(model_.lamp.theta1);
    out.push_back(model_.lamp.theta2);
    return out;
  }

  void unpack(std::span<const double> flat) override {
    const std::size_t pos = read_complex(flat, 0, model_.lamp.b);
    model_.lamp.theta1 = std::max(flat[pos], kTheta1Floor);
    model_.lamp.theta2 = flat[pos + 1];
  }

  BatchResult batch(std::span<const std::size_t> idx, std::size_t layers, std::uint64_t stage, std::uint64_t epoch,
                    std::uint64_t batch) override {
    GraphOptions opt;
    opt.differentiate_onsager = cfg_.differentiate_onsager;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(idx.size());
    std::vector<SampleGradient> per(idx.size());
#pragma omp parallel for schedule(dynamic, 1) if (cfg_.parallel && count > 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto s = static_cast<std::size_t>(i);
      Rng rng = make_rng(cfg_.seed, {kTrainNoise, stage, epoch, batch, s});
      const auto [y_tilde, h_freq] = frsn_sample(f_, train_[idx[s]], model_.omega, cfg_.snr_db, rng);
      per[s] = frsn_sample_gradient(y_tilde, u_tilde_, u_, model_.lamp, h_freq, layers, opt);
    }
    BatchResult out;
    CMatrix g_b(model_.lamp.b.rows(), model_.lamp.b.cols());
    double g1 = 0.0, g2 = 0.0;
    for (const auto& s : per) {
      out.loss += s.loss;
      g_b += s.g_b;
      g1 += s.g_theta1;
      g2 += s.g_theta2;
    }
    append_complex(out.grad, g_b);
    out.grad.push_back(g1);
    out.grad.push_back(g2);
    return out;
  }

  double validate(std::size_t layers) override {
    return frsn_validation_nmse(model_, val_, f_, u_, layers, cfg_.snr_db, cfg_.seed, cfg_.parallel);
  }

  std::string describe() const override {
    return fmt("||B'||=%.4g theta1'=%.4g theta2'=%.4g", model_.lamp.b.frobenius(), model_.lamp.theta1,
               model_.lamp.theta2);
  }

 private:
  FrsnModel& model_;
  const ChannelSet& train_;
  const ChannelSet& val_;
  const TrainConfig& cfg_;
  const CMatrix& f_;
  const CMatrix& u_;
  CMatrix u_tilde_;
};

double mean_in_order(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("train: learning rate must be finite and >= 0");
  if (batch == 0) throw ParameterError("train: batch size must be at least 1");
  if (snr_db.empty()) throw ParameterError("train: SNR list is empty");
}

CrnModel initial_crn(const SystemConfig& sys, const Dictionary& dict, std::uint64_t seed) {
  CrnModel model;
  Rng rng = make_rng(seed, {kInitPhases});
  model.xi = random_phases(sys.n_bs, sys.m(), rng);
  model.link = sys.link;
  model.lamp = LampParams::untrained(effective_matrix(phases_to_combiner(model.xi), dict, sys.link));
  return model;
}

FrsnModel initial_frsn(std::vector<std::size_t> omega, const CMatrix& u) {
  FrsnModel model;
  model.lamp = LampParams::untrained(partial_dft(u, omega));
  model.omega = std::move(omega);
  return model;
}

TrainReport train_layerwise(CrnModel& model, const ChannelSet& train, const ChannelSet& validation,
                            const SystemConfig& sys, const TrainConfig& cfg, const Dictionary& dict) {
  CrnProblem problem(model, train, validation, cfg, dict);
  return run_stages(problem, train.size(), sys.layers, cfg, "crn");
}

double crn_validation_nmse(const CrnModel& model, const ChannelSet& validation, const Dictionary& dict,
                           std::size_t layers, std::span<const double> snr_db, std::uint64_t seed, bool parallel) {
  if (validation.empty()) throw ParameterError("validation set is empty");
  const CMatrix f = phases_to_combiner(model.xi);
  const CMatrix a = effective_matrix(f, dict, model.link);
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(validation.size());
  std::vector<double> ratio(validation.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel && count > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto s = static_cast<std::size_t>(i);
    Rng rng = make_rng(seed, {kValidationNoise, s});
    const CMatrix& h = validation[s];
    const Measurement meas = measure(f, h, snr_db[s % snr_db.size()], rng, model.link);
    const LampTrace trace = mmv_lamp_run(meas.y, a, model.lamp, layers);
    ratio[s] = (matmul(dict.dh, trace.output()) - h).frobenius_sq() / h.frobenius_sq();
  }
  return mean_in_order(ratio);
}

TrainReport train_frsn(FrsnModel& model, const ChannelSet& train, const ChannelSet& validation,
                       const SystemConfig& sys, const TrainConfig& cfg, const CMatrix& f, const CMatrix& u) {
  FrsnProblem problem(model, train, validation, cfg, f, u);
  return run_stages(problem, train.size(), sys.frsn_layers, cfg, "frsn");
}

double frsn_validation_nmse(const FrsnModel& model, const ChannelSet& validation, const CMatrix& f, const CMatrix& u,
                            std::size_t layers, std::span<const double> snr_db, std::uint64_t seed, bool parallel) {
  if (validation.empty()) throw ParameterError("validation set is empty");
  const CMatrix u_tilde = partial_dft(u, model.omega);
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(validation.size());
  std::vector<double> ratio(validation.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel && count > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto s = static_cast<std::size_t>(i);
    Rng rng = make_rng(seed, {kValidationNoise, s});
    const std::vector<double> one{snr_db[s % snr_db.size()]};
    const auto [y_tilde, h_freq] = frsn_sample(f, validation[s], model.omega, one, rng);
    const LampTrace trace = mmv_lamp_run(y_tilde, u_tilde, model.lamp, layers);
    ratio[s] = (matmul(u, trace.output()) - h_freq).frobenius_sq() / h_freq.frobenius_sq();
  }
  return mean_in_order(ratio);
}

}  // namespace mmv
