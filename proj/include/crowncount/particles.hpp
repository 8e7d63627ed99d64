#pragma once

// Particle analysis: measure labeled blobs, fit moment ellipses, count the
// ones whose equivalent radius clears the minimum.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "crowncount/imaging.hpp"
#include "crowncount/segmentation.hpp"

namespace crowncount {

/// One counted crown.
struct Detection {
    int id = 0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double area = 0.0;
    /// Full axis lengths.
    double major = 0.0;
    double minor = 0.0;
    /// Degrees in [0, 180), measured from +x towards +y (image rows grow downward).
    double angle = 0.0;
    /// Mean tree probability over the blob; 1.0 when no probability map is supplied.
    double score = 1.0;

    /// sqrt(area / pi)
    double equivalent_radius() const;
};

struct PixelCoord {
    int x = 0;
    int y = 0;
};

struct EllipseFit {
    double major = 0.0;
    double minor = 0.0;
    double angle = 0.0;
};

/// Ellipse with the blob's second-order central moments, each pixel treated as
/// a unit square, scaled so the ellipse area equals the pixel count.
EllipseFit fit_ellipse(std::span<const PixelCoord> pixels);

std::vector<Detection> analyze_particles(const LabelMap& labels, double min_radius,
                                         const ProbabilityMap* probability = nullptr);

// CSV: id,x,y,area,major,minor,angle,score with 3 decimals.
void write_detections_csv(std::ostream& out, std::span<const Detection> detections);
void save_detections_csv(const std::filesystem::path& path, std::span<const Detection> detections);
std::vector<Detection> read_detections_csv(std::istream& in);
std::vector<Detection> load_detections_csv(const std::filesystem::path& path);

}  // namespace crowncount
