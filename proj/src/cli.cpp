#include "l1ksvd/cli.hpp"

#include "l1ksvd/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace l1ksvd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTraceHeader = "iteration,adr,kappa,l1_err,l2_err";
constexpr const char* kDenoiseHeader =
    "backend,sigma,noise,lambda,n_p,input_psnr,input_ssim,output_psnr,output_ssim";

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw InvalidArgument(std::string(what) + " path is required");
  if (!fs::is_regular_file(p)) throw InvalidArgument(std::string(what) + " not found: " + p.string());
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

json irls_json(const IrlsParams& p) {
  return {{"epsilon", p.epsilon}, {"relative_epsilon", p.relative_epsilon},
          {"max_inner_iters", p.max_inner_iters}, {"rel_tol", p.rel_tol}};
}

json rank1_json(const L1RankOneParams& p) {
  return {{"passes", p.passes}, {"epsilon", p.epsilon}, {"relative_epsilon", p.relative_epsilon}};
}

void validate(const SynthOptions& o) {
  if (o.sizes.empty()) throw InvalidArgument("synth: at least one N is required");
  for (Index n : o.sizes) {
    SynthSpec s = o.spec;
    s.n = n;
    validate(s);
  }
  if (o.outer_iters < 1) throw InvalidArgument("synth: iters must be >= 1");
  if (o.trials < 1) throw InvalidArgument("synth: trials must be >= 1");
  if (o.algorithms.empty()) throw InvalidArgument("synth: no algorithm selected");
  if (o.workers < 1) throw InvalidArgument("synth: workers must be >= 1");
  if (!(o.threshold_factor >= 0.0)) throw InvalidArgument("synth: threshold factor must be >= 0");
  if (o.l1_coding == L1Coding::Penalized && !(o.lambda > 0.0)) {
    throw InvalidArgument("synth: lambda must be positive");
  }
  validate(o.irls);
  validate(o.rank1);
}

// Runs fn(i) for i in [0, count) on up to `workers` threads; rethrows the
// first failure.
template <typename Fn>
void run_parallel(std::size_t count, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const char* to_string(ThresholdBasis b) {
  switch (b) {
    case ThresholdBasis::Frobenius: return "frobenius";
    case ThresholdBasis::ColumnRms: return "column-rms";
    case ThresholdBasis::None: return "none";
  }
  return "?";
}

ThresholdBasis parse_threshold_basis(const std::string& s) {
  if (s == "frobenius") return ThresholdBasis::Frobenius;
  if (s == "column-rms") return ThresholdBasis::ColumnRms;
  if (s == "none") return ThresholdBasis::None;
  throw InvalidArgument("unknown threshold basis '" + s + "'");
}

RngSeed trial_instance_seed(RngSeed root, Index n, int trial) {
  return Rng(root).split(static_cast<std::uint64_t>(n)).derive_seed(static_cast<std::uint64_t>(trial));
}

RngSeed trial_learner_seed(RngSeed instance_seed) { return Rng(instance_seed).derive_seed(0xD1C7); }

LearnConfig synth_learn_config(const SynthOptions& opts, const SynthInstance& inst, Algorithm algorithm,
                               RngSeed learner_seed) {
  LearnConfig cfg;
  cfg.n_atoms = opts.spec.k;
  cfg.outer_iters = opts.outer_iters;
  cfg.irls = opts.irls;
  cfg.rank1 = opts.rank1;
  cfg.seed = learner_seed;
  if (algorithm == Algorithm::KSVD) {
    cfg.coder = OmpSparsity{opts.spec.s};
    return cfg;
  }
  if (opts.l1_coding == L1Coding::Constrained) {
    std::vector<double> taus(static_cast<std::size_t>(inst.x_true.cols()));
    for (Index n = 0; n < inst.x_true.cols(); ++n) taus[static_cast<std::size_t>(n)] = inst.x_true.col(n).lpNorm<1>();
    cfg.coder = IrlsConstrained{std::move(taus)};
  } else {
    cfg.coder = IrlsPenalized{{opts.lambda}};
  }
  // The threshold is fixed from the ground-truth coefficient scale.
  const double fro = inst.x_true.norm();
  switch (opts.threshold_basis) {
    case ThresholdBasis::Frobenius:
      cfg.prune_rule = AbsoluteThreshold{opts.threshold_factor * fro};
      break;
    case ThresholdBasis::ColumnRms:
      cfg.prune_rule = AbsoluteThreshold{opts.threshold_factor * fro /
                                         std::sqrt(static_cast<double>(inst.x_true.cols()))};
      break;
    case ThresholdBasis::None:
      break;
  }
  return cfg;
}

SynthTrialResult run_synth_trial(const SynthOptions& opts, Index n, int trial, Algorithm algorithm) {
  SynthSpec spec = opts.spec;
  spec.n = n;
  spec.seed = trial_instance_seed(opts.spec.seed, n, trial);
  const SynthInstance inst = generate_instance(spec);
  const RngSeed learner_seed = trial_learner_seed(spec.seed);
  const LearnConfig cfg = synth_learn_config(opts, inst, algorithm, learner_seed);
  LearnResult res = learn(inst.y_noisy, cfg, algorithm, inst.d_true);
  return SynthTrialResult{n, trial, algorithm, spec.seed, learner_seed, std::move(res.trace)};
}

void write_trace_csv(std::ostream& out, const LearnTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << optional_cell(r.adr) << ',' << optional_cell(r.kappa) << ','
        << format_double(r.l1_err) << ',' << format_double(r.l2_err) << '\n';
  }
}

LearnTrace average_traces(const std::vector<LearnTrace>& traces) {
  LearnTrace avg;
  if (traces.empty()) return avg;
  const std::size_t len = traces.front().records.size();
  for (const auto& t : traces)
    if (t.records.size() != len) throw InvalidArgument("average_traces: traces differ in length");
  const auto count = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    TraceRecord r;
    r.iteration = traces.front().records[i].iteration;
    double adr = 0.0, kappa = 0.0;
    bool has_truth = true;
    for (const auto& t : traces) {
      const auto& src = t.records[i];
      r.l1_err += src.l1_err / count;
      r.l2_err += src.l2_err / count;
      r.fro_after_coding += src.fro_after_coding / count;
      r.fro_after_update += src.fro_after_update / count;
      if (src.adr && src.kappa) {
        adr += *src.adr / count;
        kappa += *src.kappa / count;
      } else {
        has_truth = false;
      }
    }
    if (has_truth) {
      r.adr = adr;
      r.kappa = kappa;
    }
    avg.records.push_back(r);
  }
  return avg;
}

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    validate(opts);
    for (Index n : opts.sizes) ensure_directory(opts.out_dir / ("N" + std::to_string(n)));
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    struct Task {
      Index n;
      int trial;
      Algorithm algorithm;
    };
    std::vector<Task> tasks;
    for (Index n : opts.sizes)
      for (int t = 0; t < opts.trials; ++t)
        for (Algorithm a : opts.algorithms) tasks.push_back({n, t, a});

    std::vector<SynthTrialResult> results(tasks.size());
    std::mutex log_mutex;
    run_parallel(tasks.size(), opts.workers, [&](std::size_t i) {
      results[i] = run_synth_trial(opts, tasks[i].n, tasks[i].trial, tasks[i].algorithm);
      std::lock_guard lock(log_mutex);
      err << "synth: N=" << tasks[i].n << " trial " << tasks[i].trial << ' ' << to_string(tasks[i].algorithm)
          << " done\n";
    });

    json manifest;
    manifest["command"] = "synth";
    manifest["csv_schema_version"] = kCsvSchemaVersion;
    manifest["seed"] = opts.spec.seed.value;
    manifest["m"] = opts.spec.m;
    manifest["K"] = opts.spec.k;
    manifest["s"] = opts.spec.s;
    manifest["N"] = opts.sizes;
    manifest["snr_db"] = opts.spec.snr_db;
    manifest["noise"] = to_string(opts.spec.noise);
    manifest["iters"] = opts.outer_iters;
    manifest["trials"] = opts.trials;
    std::vector<std::string> algs;
    for (Algorithm a : opts.algorithms) algs.emplace_back(to_string(a));
    manifest["algorithms"] = algs;
    manifest["l1_coding"] = opts.l1_coding == L1Coding::Constrained ? "constrained" : "penalized";
    manifest["lambda"] = opts.lambda;
    manifest["threshold_factor"] = opts.threshold_factor;
    manifest["threshold_basis"] = to_string(opts.threshold_basis);
    manifest["irls"] = irls_json(opts.irls);
    manifest["rank1"] = rank1_json(opts.rank1);
    manifest["runs"] = json::array();

    out << "N,algorithm,trial,final_adr,final_kappa\n";
    std::ofstream summary = open_output(opts.out_dir / "summary.csv");
    summary << "N,algorithm,trial,final_adr,final_kappa\n";
    for (Index n : opts.sizes) {
      const fs::path dir = opts.out_dir / ("N" + std::to_string(n));
      for (Algorithm a : opts.algorithms) {
        std::vector<LearnTrace> traces;
        for (const auto& r : results) {
          if (r.n != n || r.algorithm != a) continue;
          std::ofstream f = open_output(dir / ("trial_" + std::to_string(r.trial) + "_" + to_string(a) + ".csv"));
          write_trace_csv(f, r.trace);
          traces.push_back(r.trace);
          const auto& last = r.trace.records.back();
          std::ostringstream line;
          line << n << ',' << to_string(a) << ',' << r.trial << ',' << optional_cell(last.adr) << ','
               << optional_cell(last.kappa) << '\n';
          summary << line.str();
          out << line.str();
          manifest["runs"].push_back({{"N", n},
                                      {"trial", r.trial},
                                      {"algorithm", to_string(a)},
                                      {"instance_seed", r.instance_seed.value},
                                      {"learner_seed", r.learner_seed.value}});
        }
        std::ofstream f = open_output(dir / ("mean_" + std::string(to_string(a)) + ".csv"));
        const LearnTrace mean = average_traces(traces);
        write_trace_csv(f, mean);
        out << "mean N=" << n << ' ' << to_string(a) << ": adr=" << optional_cell(mean.records.back().adr)
            << " kappa=" << optional_cell(mean.records.back().kappa) << '\n';
      }
    }
    std::ofstream mf = open_output(opts.out_dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

DenoiseParams resolve_denoise_params(const DenoiseOptions& opts, Backend backend) {
  DenoiseParams p;
  p.patch = opts.patch;
  p.stride = opts.stride;
  p.dict_atoms = opts.atoms;
  p.iters = opts.iters;
  p.sigma = opts.sigma;
  p.backend = backend;
  p.seed = opts.seed;
  p.subtract_mean = opts.subtract_mean;
  p.omp_gain = opts.omp_gain;
  const auto preset = find_preset(opts.noise, opts.sigma);
  p.lambda = opts.lambda.value_or(preset ? preset->lambda : 1.0);
  p.keep_fraction = opts.keep_fraction.value_or(preset ? preset->keep_fraction : 0.08);
  return p;
}

void write_denoise_csv_header(std::ostream& out) { out << kDenoiseHeader << '\n'; }

void write_denoise_csv_row(std::ostream& out, const DenoiseRow& r) {
  out << to_string(r.backend) << ',' << format_double(r.sigma) << ',' << to_string(r.noise) << ','
      << format_double(r.lambda) << ',' << format_double(r.keep_fraction) << ',' << format_double(r.input_psnr)
      << ',' << format_double(r.input_ssim) << ',' << format_double(r.output_psnr) << ','
      << format_double(r.output_ssim) << '\n';
}

std::vector<DenoiseRow> run_denoise(const DenoiseOptions& opts, std::ostream& out) {
  const GrayImage clean = read_pgm(opts.input);
  GrayImage noisy;
  if (!opts.noisy.empty()) {
    noisy = read_pgm(opts.noisy);
    if (!noisy.same_shape(clean)) throw InvalidArgument("denoise: noisy and reference images differ in size");
  } else {
    noisy = add_noise(clean, opts.sigma, opts.noise, opts.seed);
  }
  if (opts.clamp_input) noisy = quantize_8bit(noisy);
  ensure_directory(opts.out_dir);
  write_pgm(opts.out_dir / "noisy.pgm", noisy);

  const double in_psnr = psnr(clean, noisy);
  const double in_ssim = ssim(clean, noisy);

  std::vector<DenoiseRow> rows;
  json manifest;
  manifest["command"] = "denoise";
  manifest["csv_schema_version"] = kCsvSchemaVersion;
  manifest["input"] = opts.input.string();
  manifest["noisy"] = opts.noisy.string();
  manifest["sigma"] = opts.sigma;
  manifest["noise"] = to_string(opts.noise);
  manifest["seed"] = opts.seed.value;
  manifest["patch"] = opts.patch;
  manifest["stride"] = opts.stride;
  manifest["atoms"] = opts.atoms;
  manifest["iters"] = opts.iters;
  manifest["omp_gain"] = opts.omp_gain;
  manifest["subtract_mean"] = opts.subtract_mean;
  manifest["clamp_input"] = opts.clamp_input;
  manifest["runs"] = json::array();

  for (Backend b : opts.backends) {
    const DenoiseParams params = resolve_denoise_params(opts, b);
    const DenoiseResult res = denoise_image(noisy, params);
    write_pgm(opts.out_dir / ("denoised_" + std::string(to_string(b)) + ".pgm"), res.image);
    write_pgm(opts.out_dir / ("dictionary_" + std::string(to_string(b)) + ".pgm"),
              dictionary_mosaic(res.dict, params.patch));
    DenoiseRow row;
    row.backend = b;
    row.sigma = opts.sigma;
    row.noise = opts.noise;
    row.lambda = b == Backend::L1KSVD ? params.lambda : 0.0;
    row.keep_fraction = b == Backend::L1KSVD ? params.keep_fraction : 0.0;
    row.input_psnr = in_psnr;
    row.input_ssim = in_ssim;
    row.output_psnr = psnr(clean, res.image);
    row.output_ssim = ssim(clean, res.image);
    rows.push_back(row);
    manifest["runs"].push_back({{"backend", to_string(b)},
                                {"lambda", params.lambda},
                                {"n_p", params.keep_fraction},
                                {"irls", irls_json(params.irls)},
                                {"rank1", rank1_json(params.rank1)}});
  }

  std::ofstream csv = open_output(opts.out_dir / "results.csv");
  write_denoise_csv_header(csv);
  write_denoise_csv_header(out);
  for (const auto& r : rows) {
    write_denoise_csv_row(csv, r);
    write_denoise_csv_row(out, r);
  }
  const DenoiseRow* l1 = nullptr;
  const DenoiseRow* l2 = nullptr;
  for (const auto& r : rows) (r.backend == Backend::L1KSVD ? l1 : l2) = &r;
  if (l1 && l2) out << "ssim_gain_l1ksvd_minus_ksvd," << format_double(l1->output_ssim - l2->output_ssim) << '\n';

  std::ofstream mf = open_output(opts.out_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  return rows;
}

int cmd_denoise(const DenoiseOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    require_file(opts.input, "input image");
    if (!opts.noisy.empty()) require_file(opts.noisy, "noisy image");
    if (opts.backends.empty()) throw InvalidArgument("no backend selected");
    for (Backend b : opts.backends) validate(resolve_denoise_params(opts, b));
    ensure_directory(opts.out_dir);
  } catch (const std::exception& e) {
    err << "denoise: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    run_denoise(opts, out);
  } catch (const std::exception& e) {
    err << "denoise: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

double run_addnoise(const AddNoiseOptions& opts) {
  const GrayImage clean = read_pgm(opts.input);
  const GrayImage noisy = quantize_8bit(add_noise(clean, opts.sigma, opts.noise, opts.seed));
  write_pgm(opts.output, noisy);
  return psnr(clean, noisy);
}

int cmd_addnoise(const AddNoiseOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    require_file(opts.input, "input image");
    if (opts.output.empty()) throw InvalidArgument("output path is required");
    if (!(opts.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
    if (opts.output.has_parent_path()) ensure_directory(opts.output.parent_path());
  } catch (const std::exception& e) {
    err << "addnoise: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    out << "psnr," << format_double(run_addnoise(opts)) << '\n';
  } catch (const std::exception& e) {
    err << "addnoise: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_metrics(const fs::path& reference, const fs::path& test, std::ostream& out, std::ostream& err) {
  try {
    require_file(reference, "reference image");
    require_file(test, "test image");
  } catch (const std::exception& e) {
    err << "metrics: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const GrayImage a = read_pgm(reference);
    const GrayImage b = read_pgm(test);
    out << "psnr," << format_double(psnr(a, b)) << '\n' << "ssim," << format_double(ssim(a, b)) << '\n';
  } catch (const std::exception& e) {
    err << "metrics: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

std::vector<std::string> config_file_tokens(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": empty key");
    for (char& c : key)
      if (c == '_') c = '-';
    tokens.push_back("--" + key);
    if (value != "true") tokens.push_back(value);
  }
  return tokens;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"l1-K-SVD dictionary learning experiments"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Root random seed");
    sub->add_option("--config", config_path, "Key-value file; command-line flags take precedence");
  };

  // synth
  SynthOptions synth;
  std::string synth_noise = "laplacian";
  std::vector<std::string> synth_algs{"l1ksvd", "ksvd"};
  std::string threshold_basis = to_string(synth.threshold_basis);
  std::string l1_coding = "constrained";
  std::string synth_out = synth.out_dir.string();
  auto* s = app.add_subcommand("synth", "Synthetic dictionary-recovery benchmark");
  add_common(s);
  s->add_option("--m", synth.spec.m, "Signal dimension")->capture_default_str();
  s->add_option("--K", synth.spec.k, "Atom count")->capture_default_str();
  s->add_option("--s", synth.spec.s, "Nonzeros per example")->capture_default_str();
  s->add_option("--N", synth.sizes, "Training-set size(s)")->delimiter(',')->capture_default_str();
  s->add_option("--snr-db", synth.spec.snr_db, "Input SNR in dB")->capture_default_str();
  s->add_option("--noise", synth_noise, "gaussian | laplacian")->capture_default_str();
  s->add_option("--iters", synth.outer_iters, "Outer iterations")->capture_default_str();
  s->add_option("--trials", synth.trials, "Independent trials")->capture_default_str();
  s->add_option("--algorithms", synth_algs, "l1ksvd,ksvd")->delimiter(',')->capture_default_str();
  s->add_option("--l1-coding", l1_coding, "constrained | penalized")->capture_default_str();
  s->add_option("--lambda", synth.lambda, "Penalty for penalized l1 coding")->capture_default_str();
  s->add_option("--threshold-factor", synth.threshold_factor, "Pruning threshold factor")->capture_default_str();
  s->add_option("--threshold-basis", threshold_basis, "frobenius | column-rms | none")->capture_default_str();
  s->add_option("--irls-iters", synth.irls.max_inner_iters, "IRLS inner iterations")->capture_default_str();
  s->add_option("--rank1-passes", synth.rank1.passes, "Reweighting passes per atom update")->capture_default_str();
  s->add_option("--workers", synth.workers, "Concurrent trials")->capture_default_str();
  s->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();

  // denoise
  DenoiseOptions den;
  std::string den_input, den_noisy, den_noise = "laplacian", den_out = den.out_dir.string();
  std::vector<std::string> den_backends{"l1ksvd"};
  double den_lambda = 0.0, den_np = 0.0;
  bool no_mean = false;
  auto* d = app.add_subcommand("denoise", "Patch-based image denoising");
  add_common(d);
  d->add_option("--input", den_input, "Clean reference image (PGM)");
  d->add_option("--noisy", den_noisy, "Pre-noised image (PGM); otherwise noise is added to --input");
  d->add_option("--sigma", den.sigma, "Noise standard deviation")->capture_default_str();
  d->add_option("--noise", den_noise, "gaussian | laplacian")->capture_default_str();
  d->add_option("--backend", den_backends, "ksvd | l1ksvd | both")->delimiter(',')->capture_default_str();
  auto* lambda_opt = d->add_option("--lambda", den_lambda, "l1 penalty (default: preset)");
  auto* np_opt = d->add_option("--np", den_np, "Kept fraction of K per column (default: preset)");
  d->add_option("--iters", den.iters, "Training iterations")->capture_default_str();
  d->add_option("--atoms", den.atoms, "Dictionary size")->capture_default_str();
  d->add_option("--patch", den.patch, "Patch side")->capture_default_str();
  d->add_option("--stride", den.stride, "Patch stride")->capture_default_str();
  d->add_option("--omp-gain", den.omp_gain, "OMP residual gain")->capture_default_str();
  d->add_flag("--no-mean-subtraction", no_mean, "Code raw patches instead of mean-removed ones");
  d->add_flag("--clamp-input", den.clamp_input, "Round and clamp the noisy image to 8 bits");
  d->add_option("--out-dir", den_out, "Output directory")->capture_default_str();

  // addnoise
  AddNoiseOptions an;
  std::string an_input, an_output, an_noise = "gaussian";
  auto* a = app.add_subcommand("addnoise", "Add synthetic noise to an image");
  add_common(a);
  a->add_option("--input", an_input, "Input image (PGM)");
  a->add_option("--output", an_output, "Output image (PGM)");
  a->add_option("--sigma", an.sigma, "Noise standard deviation")->capture_default_str();
  a->add_option("--noise", an_noise, "gaussian | laplacian")->capture_default_str();

  // metrics
  std::string met_ref, met_test;
  auto* mt = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  add_common(mt);
  mt->add_option("--reference", met_ref, "Reference image (PGM)");
  mt->add_option("--test", met_test, "Test image (PGM)");

  // Expand --config before parsing so explicit flags override file values.
  std::vector<std::string> args(argv, argv + argc);
  try {
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string file;
      std::size_t erase = 0;
      if (args[i] == "--config" && i + 1 < args.size()) {
        file = args[i + 1];
        erase = 2;
      } else if (args[i].rfind("--config=", 0) == 0) {
        file = args[i].substr(9);
        erase = 1;
      }
      if (erase == 0) continue;
      auto tokens = config_file_tokens(file);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
      // Config values go right after the subcommand name.
      std::size_t sub_pos = 1;
      while (sub_pos < args.size() && app.get_subcommand_no_throw(args[sub_pos]) == nullptr) ++sub_pos;
      const std::size_t insert_at = std::min(sub_pos + 1, args.size());
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), tokens.begin(), tokens.end());
      break;
    }
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<const char*> cargs;
  for (const auto& arg : args) cargs.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) {
      synth.spec.seed = RngSeed{seed};
      synth.spec.noise = parse_noise_kind(synth_noise);
      synth.algorithms.clear();
      for (const auto& name : synth_algs) {
        if (name == "l1ksvd") synth.algorithms.push_back(Algorithm::L1KSVD);
        else if (name == "ksvd") synth.algorithms.push_back(Algorithm::KSVD);
        else throw InvalidArgument("unknown algorithm '" + name + "'");
      }
      if (l1_coding == "constrained") synth.l1_coding = L1Coding::Constrained;
      else if (l1_coding == "penalized") synth.l1_coding = L1Coding::Penalized;
      else throw InvalidArgument("unknown l1 coding '" + l1_coding + "'");
      synth.threshold_basis = parse_threshold_basis(threshold_basis);
      synth.out_dir = synth_out;
      return cmd_synth(synth, out, err);
    }
    if (d->parsed()) {
      den.seed = RngSeed{seed};
      den.input = den_input;
      den.noisy = den_noisy;
      den.noise = parse_noise_kind(den_noise);
      den.backends.clear();
      for (const auto& name : den_backends) {
        if (name == "both") {
          den.backends = {Backend::KSVD, Backend::L1KSVD};
          break;
        }
        den.backends.push_back(parse_backend(name));
      }
      if (lambda_opt->count() > 0) den.lambda = den_lambda;
      if (np_opt->count() > 0) den.keep_fraction = den_np;
      den.subtract_mean = !no_mean;
      den.out_dir = den_out;
      return cmd_denoise(den, out, err);
    }
    if (a->parsed()) {
      an.seed = RngSeed{seed};
      an.input = an_input;
      an.output = an_output;
      an.noise = parse_noise_kind(an_noise);
      return cmd_addnoise(an, out, err);
    }
    if (mt->parsed()) return cmd_metrics(met_ref, met_test, out, err);
  } catch (const InvalidArgument& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace l1ksvd
