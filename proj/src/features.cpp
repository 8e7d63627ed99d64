#include "crowncount/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>

#include "crowncount/util.hpp"

namespace crowncount {

void FeatureConfig::validate() const {
    for (const double s : gaussian_sigmas) {
        require(std::isfinite(s) && s > 0.0, "gaussian sigmas must be positive");
    }
    for (const int w : stat_windows) {
        require(w >= 3 && w % 2 == 1, "stat windows must be odd and >= 3");
    }
}

Hsi rgb_to_hsi(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const double r = r8;
    const double g = g8;
    const double b = b8;
    const double mean = (r + g + b) / 3.0;
    Hsi out;
    out.i = mean / 255.0;
    if (mean <= 0.0) {
        return out;
    }
    out.s = 1.0 - std::min({r, g, b}) / mean;
    if (r8 == g8 && g8 == b8) {
        out.s = 0.0;
        return out;
    }
    const double num = 0.5 * ((r - g) + (r - b));
    const double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
    const double cosine = std::clamp(num / den, -1.0, 1.0);
    double h = std::acos(cosine) * 180.0 / std::numbers::pi;
    if (b > g) {
        h = 360.0 - h;
    }
    out.h = h >= 360.0 ? 0.0 : h;
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(k * k) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : taps) {
        v /= sum;
    }
    return taps;
}

GrayPlane gaussian_blur(const GrayPlane& plane, double sigma) {
    const std::vector<double> taps = gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = plane.width();
    const int h = plane.height();

    GrayPlane horizontal(w, h);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[static_cast<std::size_t>(k + radius)] * plane.clamped(x + k, y);
            }
            horizontal(x, y) = acc;
        }
    });
    GrayPlane out(w, h);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[static_cast<std::size_t>(k + radius)] * horizontal.clamped(x, y + k);
            }
            out(x, y) = acc;
        }
    });
    return out;
}

GrayPlane sobel_magnitude(const GrayPlane& plane) {
    const int w = plane.width();
    const int h = plane.height();
    GrayPlane out(w, h);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            const auto p = [&](int dx, int dy) { return plane.clamped(x + dx, y + dy); };
            const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            out(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    });
    return out;
}

LocalStats local_stats(const GrayPlane& plane, int window) {
    require(window >= 3 && window % 2 == 1, "window must be odd and >= 3");
    const int w = plane.width();
    const int h = plane.height();
    const int r = window / 2;
    const double n = static_cast<double>(window) * window;
    LocalStats out{GrayPlane(w, h), GrayPlane(w, h), GrayPlane(w, h), GrayPlane(w, h)};
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const double v = plane.clamped(x + dx, y + dy);
                    sum += v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            const double mean = sum / n;
            double ss = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const double d = plane.clamped(x + dx, y + dy) - mean;
                    ss += d * d;
                }
            }
            out.mean(x, y) = mean;
            out.variance(x, y) = ss / n;
            out.min(x, y) = lo;
            out.max(x, y) = hi;
        }
    });
    return out;
}

void FeatureStack::add(std::string name, GrayPlane plane) {
    require(plane.same_shape(width_, height_), "feature plane size mismatch");
    for (const auto& existing : planes_) {
        require(existing.name != name, "duplicate feature plane name " + name);
    }
    planes_.push_back(FeaturePlane{std::move(name), std::move(plane)});
}

std::vector<std::string> FeatureStack::names() const {
    std::vector<std::string> out;
    out.reserve(planes_.size());
    for (const auto& p : planes_) {
        out.push_back(p.name);
    }
    return out;
}

void FeatureStack::gather(std::size_t pixel, std::span<double> out) const {
    for (std::size_t f = 0; f < planes_.size(); ++f) {
        out[f] = planes_[f].plane[pixel];
    }
}

GrayPlane intensity_plane(const RasterImage& image) {
    GrayPlane out(image.width(), image.height());
    for (std::size_t i = 0; i < image.size(); ++i) {
        const Rgb p = image[i];
        out[i] = (static_cast<double>(p.r) + p.g + p.b) / (3.0 * 255.0);
    }
    return out;
}

namespace {

std::string number_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

FeatureStack build_stack(const RasterImage& image, const FeatureConfig& config) {
    config.validate();
    require(!image.empty(), "image must not be empty");
    const int w = image.width();
    const int h = image.height();
    FeatureStack stack(w, h);

    GrayPlane red(w, h), green(w, h), blue(w, h);
    for (std::size_t i = 0; i < image.size(); ++i) {
        red[i] = image[i].r / 255.0;
        green[i] = image[i].g / 255.0;
        blue[i] = image[i].b / 255.0;
    }
    stack.add("R", std::move(red));
    stack.add("G", std::move(green));
    stack.add("B", std::move(blue));

    GrayPlane intensity = intensity_plane(image);
    if (config.include_hsi) {
        GrayPlane hue(w, h), saturation(w, h);
        for (std::size_t i = 0; i < image.size(); ++i) {
            const Hsi hsi = rgb_to_hsi(image[i].r, image[i].g, image[i].b);
            hue[i] = hsi.h / 360.0;
            saturation[i] = hsi.s;
        }
        stack.add("H", std::move(hue));
        stack.add("S", std::move(saturation));
        stack.add("I", intensity);
    }

    std::vector<GrayPlane> blurred;
    blurred.reserve(config.gaussian_sigmas.size());
    for (const double sigma : config.gaussian_sigmas) {
        blurred.push_back(gaussian_blur(intensity, sigma));
        stack.add("gauss_s" + number_tag(sigma), blurred.back());
    }
    if (config.include_gradient) {
        for (std::size_t k = 0; k < blurred.size(); ++k) {
            stack.add("sobel_s" + number_tag(config.gaussian_sigmas[k]), sobel_magnitude(blurred[k]));
        }
    }
    for (const int window : config.stat_windows) {
        LocalStats stats = local_stats(intensity, window);
        const std::string tag = "_w" + std::to_string(window);
        stack.add("mean" + tag, std::move(stats.mean));
        stack.add("var" + tag, std::move(stats.variance));
        stack.add("min" + tag, std::move(stats.min));
        stack.add("max" + tag, std::move(stats.max));
    }
    return stack;
}

void export_stack(const FeatureStack& stack, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    for (std::size_t k = 0; k < stack.planes().size(); ++k) {
        const auto& [name, plane] = stack.planes()[k];
        const auto [lo_it, hi_it] = std::minmax_element(plane.values().begin(), plane.values().end());
        const double lo = *lo_it;
        const double span = *hi_it - lo;
        Grid<std::uint8_t> gray(plane.width(), plane.height());
        for (std::size_t i = 0; i < plane.size(); ++i) {
            const double t = span > 0.0 ? (plane[i] - lo) / span : 0.0;
            gray[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
        save_gray8(gray, directory / (std::to_string(k) + "_" + name + ".png"));
    }
}

}  // namespace crowncount
