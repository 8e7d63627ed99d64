#pragma once

// Helpers shared by the unit tests: scratch directories and rasterized shapes.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "crowncount/imaging.hpp"

namespace testing {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("crowncount-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Pixel (x, y) is inside when its center lies within the ellipse.
inline void paint_ellipse(crowncount::BinaryMask& mask, double cx, double cy, double a, double b,
                          double angle_deg = 0.0) {
    const double t = angle_deg * M_PI / 180.0;
    const double c = std::cos(t);
    const double s = std::sin(t);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double u = (dx * c + dy * s) / a;
            const double v = (-dx * s + dy * c) / b;
            if (u * u + v * v <= 1.0) {
                mask(x, y) = 1;
            }
        }
    }
}

inline void paint_disk(crowncount::BinaryMask& mask, double cx, double cy, double r) {
    paint_ellipse(mask, cx, cy, r, r);
}

inline crowncount::BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    crowncount::BinaryMask mask(w, h);
    std::bernoulli_distribution on(density);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = on(rng) ? 1 : 0;
    }
    return mask;
}

inline std::size_t foreground(const crowncount::BinaryMask& mask) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        n += mask[i] != 0;
    }
    return n;
}

}  // namespace testing
