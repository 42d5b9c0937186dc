#include "metrics/metrics.hpp"

#include <cmath>
#include <map>
#include <regex>

#include "common/error.hpp"
#include "common/text.hpp"
#include "executor/subprocess.hpp"

namespace chatvis::metrics {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) {
        auto desc = [](const ImageBuffer& i) {
            return std::to_string(i.width) + "x" + std::to_string(i.height) + "x" + std::to_string(i.channels);
        };
        throw Error(Errc::ShapeMismatch, desc(a) + " vs " + desc(b));
    }
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sum += d * d;
    }
    if (sum == 0.0) return kPsnrInfinity;
    double mse = sum / static_cast<double>(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::vector<double> gaussian_taps(int window, double sigma) {
    std::vector<double> taps(static_cast<std::size_t>(window));
    const double centre = (window - 1) / 2.0;
    double total = 0.0;
    for (int i = 0; i < window; ++i) {
        double d = i - centre;
        taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        total += taps[static_cast<std::size_t>(i)];
    }
    for (auto& t : taps) t /= total;
    return taps;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
    require_same_shape(a, b);
    const int win = params.window;
    if (a.width < win || a.height < win)
        throw Error(Errc::TooSmall, "image smaller than the " + std::to_string(win) + "x" + std::to_string(win) +
                                        " SSIM window");

    const auto x = luma(a);
    const auto y = luma(b);
    const auto taps = gaussian_taps(win, params.sigma);
    const int w = a.width, h = a.height;
    const int ow = w - win + 1, oh = h - win + 1;

    // Horizontal pass over the five moment images, valid columns only.
    std::vector<double> hx(static_cast<std::size_t>(ow) * h), hy(hx.size()), hxx(hx.size()), hyy(hx.size()),
        hxy(hx.size());
    for (int r = 0; r < h; ++r) {
        const double* xr = &x[static_cast<std::size_t>(r) * w];
        const double* yr = &y[static_cast<std::size_t>(r) * w];
        for (int c = 0; c < ow; ++c) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int k = 0; k < win; ++k) {
                double t = taps[static_cast<std::size_t>(k)];
                double xv = xr[c + k], yv = yr[c + k];
                sx += t * xv;
                sy += t * yv;
                sxx += t * (xv * xv);
                syy += t * (yv * yv);
                sxy += t * (xv * yv);
            }
            std::size_t o = static_cast<std::size_t>(r) * ow + c;
            hx[o] = sx, hy[o] = sy, hxx[o] = sxx, hyy[o] = syy, hxy[o] = sxy;
        }
    }

    const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
    const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
    double total = 0.0;
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
            for (int k = 0; k < win; ++k) {
                double t = taps[static_cast<std::size_t>(k)];
                std::size_t o = static_cast<std::size_t>(r + k) * ow + c;
                mx += t * hx[o];
                my += t * hy[o];
                exx += t * hxx[o];
                eyy += t * hyy[o];
                exy += t * hxy[o];
            }
            double vx = exx - mx * mx, vy = eyy - my * my, cov = exy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / (static_cast<double>(ow) * oh);
}

std::pair<ImageBuffer, ImageBuffer> conform(const ImageBuffer& a, const ImageBuffer& b, bool resize) {
    if (a.same_shape(b) || !resize) {
        require_same_shape(a, b);
        return {a, b};
    }
    if (a.channels != b.channels) require_same_shape(a, b);
    const bool a_larger = static_cast<long long>(a.width) * a.height >= static_cast<long long>(b.width) * b.height;
    if (a_larger) return {resize_nearest(a, b.width, b.height), b};
    return {a, resize_nearest(b, a.width, a.height)};
}

double lpips(const std::filesystem::path& a, const std::filesystem::path& b, const std::string& plugin_template,
             double timeout_seconds) {
    auto argv = text::split_command(plugin_template);
    if (argv.empty()) throw Error(Errc::PluginMissing, "no LPIPS plugin configured");
    for (auto& arg : argv) {
        std::map<std::string, std::string> vars{{"A", a.string()}, {"B", b.string()}};
        for (const auto& [key, value] : vars) {
            const std::string slot = "{" + key + "}";
            for (auto pos = arg.find(slot); pos != std::string::npos; pos = arg.find(slot, pos + value.size()))
                arg.replace(pos, slot.size(), value);
        }
    }
    if (!executor::resolve_executable(argv.front())) throw Error(Errc::PluginMissing, argv.front());
    std::error_code ec;
    if (!std::filesystem::exists(a, ec) || !std::filesystem::exists(b, ec))
        throw Error(Errc::InvalidArgument, "LPIPS input image missing");

    auto proc = executor::run_process(argv, std::filesystem::current_path(),
                                      std::chrono::duration<double>(timeout_seconds));
    if (proc.timed_out) throw Error(Errc::PluginMalformedOutput, "LPIPS plugin timed out");
    if (proc.exit_code != 0)
        throw Error(Errc::PluginMalformedOutput,
                    "LPIPS plugin exited with status " + std::to_string(proc.exit_code.value_or(-1)) + ": " +
                        std::string(text::trim(proc.err)));

    static const std::regex decimal(R"(^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$)");
    std::string out(text::trim(proc.out));
    if (!std::regex_match(out, decimal))
        throw Error(Errc::PluginMalformedOutput, "expected one decimal, got '" + out + "'");
    double value = std::strtod(out.c_str(), nullptr);
    if (!(value >= 0.0 && value <= 1.0))
        throw Error(Errc::PluginMalformedOutput, "LPIPS value " + out + " outside [0, 1]");
    return value;
}

double scale_psnr(double pass_at_1, double mean_psnr) { return pass_at_1 / 100.0 * mean_psnr; }
double scale_ssim(double pass_at_1, double mean_ssim) { return pass_at_1 / 100.0 * mean_ssim; }
double scale_lpips(double pass_at_1, double mean_lpips) { return 1.0 - (1.0 - mean_lpips) * pass_at_1 / 100.0; }

AggregateScores aggregate(const std::vector<TaskScore>& scores) {
    if (scores.empty()) throw Error(Errc::EmptyInput, "no task scores to aggregate");
    AggregateScores agg;
    agg.tasks = scores.size();

    double sum_ssim = 0, sum_psnr = 0, sum_lpips = 0;
    std::size_t n_ssim = 0, n_psnr = 0, n_lpips = 0;
    for (const auto& s : scores) {
        if (!s.passed) {
            if (s.ssim || s.psnr || s.lpips)
                throw Error(Errc::InvalidArgument, "task " + s.task_id + " carries metrics but did not pass");
            continue;
        }
        ++agg.passed;
        if (s.ssim) sum_ssim += *s.ssim, ++n_ssim;
        if (s.psnr) sum_psnr += std::isinf(*s.psnr) ? kPsnrAggregateCap : *s.psnr, ++n_psnr;
        if (s.lpips) sum_lpips += *s.lpips, ++n_lpips;
    }
    agg.pass_at_1 = 100.0 * static_cast<double>(agg.passed) / static_cast<double>(agg.tasks);

    if (agg.passed == 0) {
        agg.scaled_psnr = 0.0;
        agg.scaled_ssim = 0.0;
        agg.scaled_lpips = 1.0;
        return agg;
    }
    if (n_ssim) {
        agg.mean_ssim = sum_ssim / static_cast<double>(n_ssim);
        agg.scaled_ssim = scale_ssim(agg.pass_at_1, *agg.mean_ssim);
    }
    if (n_psnr) {
        agg.mean_psnr = sum_psnr / static_cast<double>(n_psnr);
        agg.scaled_psnr = scale_psnr(agg.pass_at_1, *agg.mean_psnr);
    }
    if (n_lpips) {
        agg.mean_lpips = sum_lpips / static_cast<double>(n_lpips);
        agg.scaled_lpips = scale_lpips(agg.pass_at_1, *agg.mean_lpips);
    }
    return agg;
}

}  // namespace chatvis::metrics
