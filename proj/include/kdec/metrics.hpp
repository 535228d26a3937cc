#pragma once

#include <string>
#include <vector>

#include "kdec/image.hpp"
#include "kdec/net.hpp"
#include "kdec/train.hpp"

namespace kdec {

/// 10*log10(255^2 / MSE); +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// L = 255. Requires equal dimensions of at least 11x11.
double ssim(const GrayImage& a, const GrayImage& b);

struct EvalRow {
  std::string id;
  double psnr_jpeg = 0.0;
  double psnr_model = 0.0;
  double ssim_jpeg = 0.0;
  double ssim_model = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<std::string> missing;  // pairs that failed to load
  double mean_psnr_jpeg = 0.0;
  double mean_psnr_model = 0.0;
  double mean_ssim_jpeg = 0.0;
  double mean_ssim_model = 0.0;
  double ipsnr = 0.0;
  double issim = 0.0;
  int quality = 0;
  std::string checkpoint_id;
};

enum class EvalSplit { all, train, val };

/// Baseline decode vs. model reconstruction metrics for every selected pair.
/// Missing files are recorded and skipped.
EvalReport evaluate(const Manifest& manifest, const ModelParams& params,
                    EvalSplit split = EvalSplit::all);

/// Header row, one row per image, aggregate rows tagged AGGREGATE.
void write_report_csv(const EvalReport& report, const std::string& path);

}  // namespace kdec
