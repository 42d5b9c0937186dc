#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metrics/image.hpp"

namespace chatvis::metrics {

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();
// Stand-in for infinite PSNR when averaging.
inline constexpr double kPsnrAggregateCap = 100.0;

// 10 log10(255^2 / MSE) over all samples; kPsnrInfinity when MSE is zero.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int window, double sigma);

// Single-scale SSIM on BT.601 luma, averaged over every valid window position.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

// Optional nearest-neighbour downscale of the larger image before scoring.
std::pair<ImageBuffer, ImageBuffer> conform(const ImageBuffer& a, const ImageBuffer& b, bool resize);

// Runs an external scorer: template tokens with {A} and {B} replaced by the
// two paths. The scorer must print one decimal in [0, 1] and exit 0.
double lpips(const std::filesystem::path& a, const std::filesystem::path& b, const std::string& plugin_template,
             double timeout_seconds = 300.0);

struct TaskScore {
    std::string task_id;
    bool passed = false;
    std::optional<double> ssim;
    std::optional<double> psnr;  // may be kPsnrInfinity
    std::optional<double> lpips;
    friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

struct AggregateScores {
    double pass_at_1 = 0.0;  // percent
    std::size_t tasks = 0;
    std::size_t passed = 0;
    std::optional<double> mean_ssim;
    std::optional<double> mean_psnr;
    std::optional<double> mean_lpips;
    std::optional<double> scaled_psnr;
    std::optional<double> scaled_ssim;
    std::optional<double> scaled_lpips;
    friend bool operator==(const AggregateScores&, const AggregateScores&) = default;
};

// pass@1 = 100 passed / total. Means cover passed tasks that carry the metric.
// Scaled: psnr, ssim times pass@1/100; lpips as 1 - (1 - lpips) pass@1/100.
// With no passed task: scaled psnr = ssim = 0 and scaled lpips = 1.
AggregateScores aggregate(const std::vector<TaskScore>& scores);

double scale_psnr(double pass_at_1, double mean_psnr);
double scale_ssim(double pass_at_1, double mean_ssim);
double scale_lpips(double pass_at_1, double mean_lpips);

}  // namespace chatvis::metrics
