#pragma once

// Raster containers shared by every stage of the pipeline, plus PNG I/O.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crowncount/error.hpp"

namespace crowncount {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 2-D array. The tag parameter only distinguishes otherwise
/// identical element types (a gray plane and a probability map are both
/// doubles but must not be mixed up).
template <class T, class Tag = void>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
        require(width > 0 && height > 0, "grid dimensions must be positive");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Grid(int width, int height, std::vector<T> values)
        : width_(width), height_(height), data_(std::move(values)) {
        require(width > 0 && height > 0, "grid dimensions must be positive");
        require(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                "grid data length must equal width*height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    /// Edge-clamped read.
    const T& clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
        y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
        return data_[index(x, y)];
    }

    std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int y) const {
        return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
    }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
    template <class U, class V>
    bool same_shape(const Grid<U, V>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct GrayTag;
struct MaskTag;
struct LabelTag;

using RasterImage = Grid<Rgb>;
using GrayPlane = Grid<double, GrayTag>;
/// Values are 0 (background) or 1 (foreground).
using BinaryMask = Grid<std::uint8_t, MaskTag>;
/// 0 is background; foreground labels are 1..K.
using LabelMap = Grid<std::int32_t, LabelTag>;

/// Number of distinct foreground labels K, assuming labels are contiguous.
std::int32_t label_count(const LabelMap& labels);

struct Detection;

// PNG I/O ------------------------------------------------------------------

/// Decodes any PNG into 8-bit RGB. 16-bit samples are scaled, gray is
/// replicated across channels, palettes are expanded and alpha is dropped.
RasterImage load_image(const std::filesystem::path& path);

/// Reads a single-channel PNG without palette expansion: palette indices for
/// indexed images, 8-bit gray values otherwise.
Grid<std::uint8_t> load_index_image(const std::filesystem::path& path);

void save_image(const RasterImage& image, const std::filesystem::path& path);
void save_gray8(const Grid<std::uint8_t>& gray, const std::filesystem::path& path);
/// Writes an indexed PNG with the given palette; every index must be < palette.size().
void save_indexed(const Grid<std::uint8_t>& indices, std::span<const Rgb> palette,
                  const std::filesystem::path& path);

// Overlay -----------------------------------------------------------------

inline constexpr Rgb kOutlineColor{255, 0, 0};
inline constexpr Rgb kLabelColor{255, 255, 0};

/// Draws ellipse outlines and numeric ids for each detection. All drawing for
/// a detection stays inside its ellipse's axis-aligned bounding box grown by 2 px.
RasterImage render_overlay(const RasterImage& image, std::span<const Detection> detections);

void save_overlay(const RasterImage& image, std::span<const Detection> detections,
                  const std::filesystem::path& path);

/// Half extents of the axis-aligned bounding box of an ellipse with full axis
/// lengths `major`/`minor` rotated by `angle_deg`.
std::pair<double, double> ellipse_half_extents(double major, double minor, double angle_deg);

/// Deterministic label -> color map; label 0 is black.
Rgb label_color(std::int32_t label);
RasterImage colorize_labels(const LabelMap& labels);

}  // namespace crowncount
