#pragma once

// Synthetic plantation scenes with exact ground truth.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "crowncount/imaging.hpp"
#include "crowncount/segmentation.hpp"

namespace crowncount {

struct PlantationSpec {
    int rows = 20;
    int cols = 20;
    double spacing = 40.0;
    double crown_radius_min = 12.0;
    double crown_radius_max = 18.0;
    double jitter = 1.5;
    double failure_prob = 0.05;
    double noise_sigma = 20.0;
    int clutter_count = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr Rgb kTreeColor{60, 130, 60};
inline constexpr Rgb kSoilColor{120, 90, 60};
/// Fraction of planted trees whose interiors are annotated as class 1.
inline constexpr double kAnnotatedTreeFraction = 0.2;

struct GroundTruthCenter {
    double x = 0.0;
    double y = 0.0;
};

struct GroundTruth {
    std::vector<GroundTruthCenter> centers;

    std::size_t count() const { return centers.size(); }
};

/// Rendered crown geometry, one entry per planted tree (same order as the
/// ground-truth centers).
struct Crown {
    double cx = 0.0;
    double cy = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle_rad = 0.0;

    bool contains(double x, double y) const;
};

struct SyntheticScene {
    RasterImage image;
    GroundTruth truth;
    AnnotationMask annotation;
    std::vector<Crown> crowns;
};

/// Image size is (cols*spacing) x (rows*spacing); tree (r, c) sits at
/// ((c+0.5)*spacing, (r+0.5)*spacing) plus uniform jitter.
SyntheticScene generate(const PlantationSpec& spec);

void write_truth_csv(std::ostream& out, const GroundTruth& truth);
void save_truth_csv(const std::filesystem::path& path, const GroundTruth& truth);
/// Accepts an optional `x,y` header line.
GroundTruth read_truth_csv(std::istream& in);
GroundTruth load_truth_csv(const std::filesystem::path& path);

}  // namespace crowncount
