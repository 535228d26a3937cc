#include "kdec/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "kdec/kspace.hpp"

namespace kdec {
namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;

struct SsimWindow {
  double w[kWindow][kWindow];
  SsimWindow() {
    const double sigma = 1.5;
    double total = 0.0;
    for (int dy = -kHalf; dy <= kHalf; ++dy) {
      for (int dx = -kHalf; dx <= kHalf; ++dx) {
        const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        w[dy + kHalf][dx + kHalf] = v;
        total += v;
      }
    }
    for (auto& row : w) {
      for (double& v : row) v /= total;
    }
  }
};

void require_same_dims(const GrayImage& a, const GrayImage& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch " +
                                std::to_string(a.width) + "x" + std::to_string(a.height) +
                                " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

}  // namespace

double psnr(const GrayImage& a, const GrayImage& b) {
  require_same_dims(a, b, "psnr");
  double acc = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const GrayImage& a, const GrayImage& b) {
  require_same_dims(a, b, "ssim");
  if (a.width < kWindow || a.height < kWindow) {
    throw std::invalid_argument("ssim: images must be at least 11x11, got " +
                                std::to_string(a.width) + "x" + std::to_string(a.height));
  }
  static const SsimWindow win;
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  int64_t count = 0;
#pragma omp parallel for reduction(+ : total, count) schedule(static)
  for (int y = kHalf; y < a.height - kHalf; ++y) {
    for (int x = kHalf; x < a.width - kHalf; ++x) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (int dy = -kHalf; dy <= kHalf; ++dy) {
        for (int dx = -kHalf; dx <= kHalf; ++dx) {
          const double w = win.w[dy + kHalf][dx + kHalf];
          const double av = a.at(y + dy, x + dx);
          const double bv = b.at(y + dy, x + dx);
          mu_a += w * av;
          mu_b += w * bv;
          aa += w * av * av;
          bb += w * bv * bv;
          ab += w * av * bv;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

EvalReport evaluate(const Manifest& manifest, const ModelParams& params, EvalSplit split) {
  EvalReport report;
  report.quality = manifest.quality;
  std::vector<std::pair<std::string, std::string>> pairs;
  if (split == EvalSplit::all || split == EvalSplit::train) {
    pairs.insert(pairs.end(), manifest.train_pairs.begin(), manifest.train_pairs.end());
  }
  if (split == EvalSplit::all || split == EvalSplit::val) {
    pairs.insert(pairs.end(), manifest.val_pairs.begin(), manifest.val_pairs.end());
  }
  for (const auto& [gt_path, ksp_path] : pairs) {
    SamplePair pair;
    try {
      pair = load_pair(gt_path, ksp_path);
    } catch (const std::exception&) {
      report.missing.push_back(gt_path + " / " + ksp_path);
      continue;
    }
    EvalRow row;
    row.id = gt_path;
    const GrayImage baseline = decode_baseline(pair.code);
    const Tensor out = forward(kspace_to_tensor(pair.code), params);
    const GrayImage recon = tensor_to_image(out);
    row.psnr_jpeg = psnr(pair.gt, baseline);
    row.psnr_model = psnr(pair.gt, recon);
    row.ssim_jpeg = ssim(pair.gt, baseline);
    row.ssim_model = ssim(pair.gt, recon);
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    const double n = static_cast<double>(report.rows.size());
    double pj = 0.0, pm = 0.0, sj = 0.0, sm = 0.0;
    for (const EvalRow& r : report.rows) {
      pj += r.psnr_jpeg;
      pm += r.psnr_model;
      sj += r.ssim_jpeg;
      sm += r.ssim_model;
    }
    report.mean_psnr_jpeg = pj / n;
    report.mean_psnr_model = pm / n;
    report.mean_ssim_jpeg = sj / n;
    report.mean_ssim_model = sm / n;
  }
  report.ipsnr = report.mean_psnr_model - report.mean_psnr_jpeg;
  report.issim = report.mean_ssim_model - report.mean_ssim_jpeg;
  return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_report_csv: cannot open " + path);
  f.precision(17);
  f << "id,psnr_jpeg,psnr_model,ssim_jpeg,ssim_model\n";
  for (const EvalRow& r : report.rows) {
    f << r.id << ',' << r.psnr_jpeg << ',' << r.psnr_model << ',' << r.ssim_jpeg << ','
      << r.ssim_model << '\n';
  }
  f << "AGGREGATE," << report.mean_psnr_jpeg << ',' << report.mean_psnr_model << ','
    << report.mean_ssim_jpeg << ',' << report.mean_ssim_model << '\n';
  f << "AGGREGATE_DELTA,ipsnr=" << report.ipsnr << ",issim=" << report.issim << ",,\n";
  if (!f) throw std::runtime_error("write_report_csv: write failed for " + path);
}

}  // namespace kdec
