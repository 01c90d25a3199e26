#pragma once

#include "l1ksvd/denoise.hpp"
#include "l1ksvd/learner.hpp"
#include "l1ksvd/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace l1ksvd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Version of the CSV layouts written by the commands below. Bump when a
/// column is added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;

/// How the pruning threshold of the l1 learner is derived from the
/// coefficients produced by each coding step.
enum class ThresholdBasis {
  /// T0 = factor * ||X||_F.
  Frobenius,
  /// T0 = factor * ||X||_F / sqrt(N), i.e. relative to the RMS column norm.
  ColumnRms,
  /// No pruning.
  None,
};
const char* to_string(ThresholdBasis b);
ThresholdBasis parse_threshold_basis(const std::string& s);

enum class L1Coding { Constrained, Penalized };

struct SynthOptions {
  SynthSpec spec;
  std::vector<Index> sizes{1500};
  int outer_iters = 80;
  int trials = 5;
  std::vector<Algorithm> algorithms{Algorithm::L1KSVD, Algorithm::KSVD};
  L1Coding l1_coding = L1Coding::Constrained;
  /// Shared penalty for L1Coding::Penalized.
  double lambda = 0.1;
  /// Tuned on the default seed for both N = 200 and N = 1500.
  double threshold_factor = 0.1;
  ThresholdBasis threshold_basis = ThresholdBasis::ColumnRms;
  IrlsParams irls;
  L1RankOneParams rank1;
  int workers = 1;
  std::filesystem::path out_dir = "synth_out";
};

struct SynthTrialResult {
  Index n = 0;
  int trial = 0;
  Algorithm algorithm = Algorithm::KSVD;
  RngSeed instance_seed;
  RngSeed learner_seed;
  LearnTrace trace;
};

/// Seeds of trial `trial` derived from the root seed.
RngSeed trial_instance_seed(RngSeed root, Index n, int trial);
RngSeed trial_learner_seed(RngSeed instance_seed);

/// Builds the learner configuration used for one synthetic trial.
LearnConfig synth_learn_config(const SynthOptions& opts, const SynthInstance& inst, Algorithm algorithm,
                               RngSeed learner_seed);

/// Runs one algorithm on one generated instance with N = n.
SynthTrialResult run_synth_trial(const SynthOptions& opts, Index n, int trial, Algorithm algorithm);

/// iteration,adr,kappa,l1_err,l2_err
void write_trace_csv(std::ostream& out, const LearnTrace& trace);
/// Per-iteration mean of several traces of equal length.
LearnTrace average_traces(const std::vector<LearnTrace>& traces);

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

struct DenoiseOptions {
  std::filesystem::path input;
  /// Already-noisy image; when empty, noise is synthesized from `input`.
  std::filesystem::path noisy;
  double sigma = 25.0;
  NoiseKind noise = NoiseKind::Laplacian;
  std::vector<Backend> backends{Backend::L1KSVD};
  std::optional<double> lambda;
  std::optional<double> keep_fraction;
  Index patch = 8;
  Index stride = 4;
  Index atoms = 128;
  int iters = 10;
  double omp_gain = 1.15;
  bool subtract_mean = true;
  /// Round and clamp the noisy image to 8 bits before denoising.
  bool clamp_input = false;
  RngSeed seed{1};
  std::filesystem::path out_dir = "denoise_out";
};

struct DenoiseRow {
  Backend backend = Backend::KSVD;
  double sigma = 0.0;
  NoiseKind noise = NoiseKind::Gaussian;
  double lambda = 0.0;
  double keep_fraction = 0.0;
  double input_psnr = 0.0;
  double input_ssim = 0.0;
  double output_psnr = 0.0;
  double output_ssim = 0.0;
};

/// Resolves lambda / n_p (explicit values, else the matching preset, else
/// 1.0 / 0.08) into full pipeline parameters.
DenoiseParams resolve_denoise_params(const DenoiseOptions& opts, Backend backend);

/// Runs the requested backends; returns one row per backend. Writes images
/// and results.csv into opts.out_dir.
std::vector<DenoiseRow> run_denoise(const DenoiseOptions& opts, std::ostream& out);
int cmd_denoise(const DenoiseOptions& opts, std::ostream& out, std::ostream& err);

void write_denoise_csv_header(std::ostream& out);
void write_denoise_csv_row(std::ostream& out, const DenoiseRow& row);

struct AddNoiseOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  double sigma = 25.0;
  NoiseKind noise = NoiseKind::Gaussian;
  RngSeed seed{1};
};

/// Writes input + noise (8-bit PGM) and returns the PSNR of the written pair.
double run_addnoise(const AddNoiseOptions& opts);
int cmd_addnoise(const AddNoiseOptions& opts, std::ostream& out, std::ostream& err);

int cmd_metrics(const std::filesystem::path& reference, const std::filesystem::path& test,
                std::ostream& out, std::ostream& err);

/// Full command-line entry point (subcommands synth, denoise, addnoise, metrics).
/// Returns 0 on success, 1 on usage errors, 2 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses "key = value" lines ('#' starts a comment) into --key value
/// tokens. Underscores in keys are read as dashes.
std::vector<std::string> config_file_tokens(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace l1ksvd
