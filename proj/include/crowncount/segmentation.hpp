#pragma once

// Supervised segmentation: sample annotated pixels into a training set,
// classify every pixel, binarize the probability map.

#include <cstdint>
#include <filesystem>

#include "crowncount/classifiers.hpp"
#include "crowncount/features.hpp"
#include "crowncount/imaging.hpp"

namespace crowncount {

enum class Mark : std::uint8_t { unlabeled = 0, tree = 1, non_tree = 2 };

struct ProbabilityTag;

using AnnotationMask = Grid<Mark>;
/// p_tree per pixel, values in [0, 1].
using ProbabilityMap = Grid<double, ProbabilityTag>;

inline constexpr int kDefaultMaxPerClass = 2000;

/// Samples up to max_per_class pixels of each class (uniform, without
/// replacement, seeded). Rows keep raster order; tree pixels get label 1.
TrainingSet extract_training(const FeatureStack& stack, const AnnotationMask& mask, int max_per_class,
                             std::uint64_t seed);

struct ClassifiedImage {
    ProbabilityMap probability;
    double seconds = 0.0;  ///< wall clock of the whole classification
};

ClassifiedImage classify_image(const ClassifierModel& model, const FeatureStack& stack,
                               unsigned threads = 0);

/// Foreground where p_tree >= threshold; threshold must lie in (0, 1).
BinaryMask binarize(const ProbabilityMap& map, double threshold = 0.5);

/// Palette index (or gray value) 0/1/2 per pixel; anything else is a FormatError.
AnnotationMask load_annotation(const std::filesystem::path& path);
void save_annotation(const AnnotationMask& mask, const std::filesystem::path& path);

/// 8-bit gray, value round(255 p).
void save_probability(const ProbabilityMap& map, const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace crowncount
