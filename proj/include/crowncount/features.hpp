#pragma once

// Per-pixel feature planes: color, HSI, multiscale smoothing, gradients and
// window statistics of the intensity channel.

#include <filesystem>
#include <string>
#include <vector>

#include "crowncount/imaging.hpp"

namespace crowncount {

struct FeatureConfig {
    std::vector<double> gaussian_sigmas{1.0, 2.0, 4.0, 8.0};
    std::vector<int> stat_windows{3, 5, 9};
    bool include_hsi = true;
    bool include_gradient = true;

    void validate() const;
};

struct Hsi {
    double h = 0.0;  ///< degrees in [0, 360)
    double s = 0.0;  ///< [0, 1]
    double i = 0.0;  ///< [0, 1]
};

Hsi rgb_to_hsi(std::uint8_t r, std::uint8_t g, std::uint8_t b);

GrayPlane gaussian_blur(const GrayPlane& plane, double sigma);

/// Normalized 1-D Gaussian taps for offsets -radius..radius, radius = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// sqrt(Gx^2 + Gy^2) with the unnormalized 3x3 Sobel kernels, edge clamped.
GrayPlane sobel_magnitude(const GrayPlane& plane);

struct LocalStats {
    GrayPlane mean;
    GrayPlane variance;  ///< population variance
    GrayPlane min;
    GrayPlane max;
};

LocalStats local_stats(const GrayPlane& plane, int window);

struct FeaturePlane {
    std::string name;
    GrayPlane plane;
};

class FeatureStack {
public:
    FeatureStack(int width, int height) : width_(width), height_(height) {}

    void add(std::string name, GrayPlane plane);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t feature_count() const { return planes_.size(); }
    const std::vector<FeaturePlane>& planes() const { return planes_; }
    std::vector<std::string> names() const;

    /// Feature vector of the pixel at row-major index `pixel`, in plane order.
    void gather(std::size_t pixel, std::span<double> out) const;

private:
    int width_;
    int height_;
    std::vector<FeaturePlane> planes_;
};

/// Planes in order: R,G,B; H,S,I (if enabled); gauss per sigma; sobel per
/// sigma (if enabled); mean,var,min,max per window. Color channels are scaled
/// to [0,1] and hue to [0,1) (degrees / 360).
FeatureStack build_stack(const RasterImage& image, const FeatureConfig& config);

/// Mean intensity (r+g+b)/(3*255) per pixel.
GrayPlane intensity_plane(const RasterImage& image);

/// Writes each plane, min-max normalized, as `<index>_<name>.png` in `directory`.
void export_stack(const FeatureStack& stack, const std::filesystem::path& directory);

}  // namespace crowncount
