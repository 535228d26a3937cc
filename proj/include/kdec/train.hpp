#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kdec/kspace.hpp"
#include "kdec/net.hpp"

namespace kdec {

struct TrainConfig {
  int quality = 10;
  int crop_size = 128;
  double learning_rate = 1e-6;
  int batch_size = 16;
  int epochs = 5;
  uint64_t seed = 0;
  std::string manifest;
  std::string out_dir = ".";
  int checkpoint_every = 1;  // epochs
  InitScheme init = InitScheme::idct_seeded;
  double clip_norm = 1e3;  // <= 0 disables clipping
  bool warmup = true;      // linear learning-rate ramp over the first epoch
  std::string resume;      // checkpoint to continue from
  int resume_epoch = 0;    // epochs already completed by the resume checkpoint
  int threads = 1;

  void validate() const;
};

/// Parses a line-oriented key=value file ('#' starts a comment). Unknown
/// keys are rejected.
TrainConfig load_config(const std::string& path);
void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value);

struct SamplePair {
  GrayImage gt;
  KSpaceImage code;
};

struct Manifest {
  int quality = 0;
  int crop = 0;
  uint64_t seed = 0;
  int skipped_sources = 0;
  std::vector<std::pair<std::string, std::string>> sources;  // (fnv1a hash hex, path)
  std::vector<std::pair<std::string, std::string>> train_pairs;  // (gt path, ksp path)
  std::vector<std::pair<std::string, std::string>> val_pairs;
};

/// Deterministic seeded crop sampling: reads every usable source image,
/// emits `count` ground-truth/code pairs under out_dir plus a manifest.
/// Undersized sources are skipped with a warning count.
Manifest make_dataset(const std::string& source_dir, int quality, int crop_size, int count,
                      uint64_t seed, const std::string& out_dir, double val_fraction = 0.1);

void write_manifest(const Manifest& m, const std::string& path);
/// Pair paths are resolved relative to the manifest's directory.
Manifest read_manifest(const std::string& path);

/// Re-checks that every pair satisfies code == encode(gt, quality).
/// Returns the paths of offending pairs.
std::vector<std::string> audit_manifest(const std::string& manifest_path);

SamplePair load_pair(const std::string& gt_path, const std::string& ksp_path);

/// One SGD step over a batch: params -= lr * mean per-sample gradient.
/// Per-sample loss is the summed squared pixel error; the returned value is
/// the pre-step batch mean. Gradients are clipped to clip_norm (global norm)
/// when clip_norm > 0. Throws on non-finite loss or gradients.
double sgd_step(ModelParams& params, const std::vector<SamplePair>& batch, double lr,
                double clip_norm = 0.0);

struct TrainResult {
  std::string final_checkpoint;
  std::string loss_log;
  double first_epoch_loss = 0.0;
  double final_epoch_loss = 0.0;
  double final_val_psnr = 0.0;
};

/// Runs seeded shuffled mini-batch epochs, writes loss_log.csv and periodic
/// checkpoints under cfg.out_dir. Bit-deterministic for a fixed seed and a
/// single thread.
TrainResult train(const TrainConfig& cfg);

/// FNV-1a 64-bit over a file's bytes, hex-encoded.
std::string file_hash_hex(const std::string& path);

}  // namespace kdec
