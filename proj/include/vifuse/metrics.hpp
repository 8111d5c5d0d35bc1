#pragma once

#include <array>
#include <string>

#include "vifuse/image.hpp"

namespace vifuse {

// All metrics scale inputs to the 0-255 domain internally.
struct MetricsReport {
  double en = 0.0;
  double sd = 0.0;
  double sf = 0.0;
  double ag = 0.0;
  double scd = 0.0;
  double vif = 0.0;
  double qabf = 0.0;
  double ssim = 0.0;

  static constexpr std::array<const char*, 8> kNames{"en", "sd", "sf", "ag",
                                                     "scd", "vif", "qabf", "ssim"};
  std::array<double, 8> values() const { return {en, sd, sf, ag, scd, vif, qabf, ssim}; }
  static MetricsReport from_values(const std::array<double, 8>& v);
};

// Xydeas-Petrovic edge preservation constants.
struct QabfConstants {
  static constexpr double kGammaG = 0.9994;
  static constexpr double kKappaG = -15.0;
  static constexpr double kSigmaG = 0.5;
  static constexpr double kGammaA = 0.9879;
  static constexpr double kKappaA = -22.0;
  static constexpr double kSigmaA = 0.8;
};

// Shannon entropy (bits) of the 256-level histogram.
double metric_en(const Image& img);
// Population standard deviation.
double metric_sd(const Image& img);
// Spatial frequency sqrt(RF^2 + CF^2) of first differences.
double metric_sf(const Image& img);
// Mean of sqrt((dx^2 + dy^2) / 2) over the (H-1)x(W-1) forward-difference grid.
double metric_ag(const Image& img);
// corr(fused - vi, ir) + corr(fused - ir, vi); zero-variance terms are 0.
double metric_scd(const Image& fused, const Image& ir, const Image& vi);

// Four-scale pixel-domain VIF averaged over both sources. Gaussian window
// sigma = 2^s / 2 at scale s = 0..3, size 2*ceil(3 sigma)+1; replicate
// padding; sensor noise variance 2. Requires min(width, height) >= 25.
double metric_vif(const Image& fused, const Image& ir, const Image& vi);
double vif_single(const Image& fused, const Image& source);

// Gradient preservation in [0,1]; 0 when no source has any edge.
double metric_qabf(const Image& fused, const Image& ir, const Image& vi);
// Per-pixel maximum of Q^{AF}: both sigmoids evaluated at full preservation.
double qabf_ceiling();

// Mean SSIM (11x11 Gaussian, sigma 1.5, valid region) averaged over both
// sources. Requires min(width, height) >= 11.
double metric_ssim(const Image& fused, const Image& ir, const Image& vi);
double ssim_single(const Image& a, const Image& b);

MetricsReport metrics_all(const Image& fused, const Image& ir, const Image& vi);

// "path,en,sd,sf,ag,scd,vif,qabf,ssim"
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& path, const MetricsReport& m);

}  // namespace vifuse
