#pragma once

// Binary-mask post-processing: hole filling, Euclidean distance transform,
// distance-based watershed and connected-component labeling.

#include "crowncount/imaging.hpp"

namespace crowncount {

struct DistanceTag;

/// Euclidean distance to the nearest background pixel, 0 on background.
/// The image is surrounded by virtual background.
using DistanceField = Grid<double, DistanceTag>;

/// Background regions not 4-connected to the border become foreground.
BinaryMask fill_holes(const BinaryMask& mask);

/// Exact EDT (lower envelope of parabolas, separable over rows and columns).
DistanceField distance_transform(const BinaryMask& mask);

/// Squared variant of distance_transform, exact integers stored as doubles.
DistanceField squared_distance_transform(const BinaryMask& mask);

inline constexpr double kSeedMergeRadius = 4.0;
/// Minimum height (px) of a maximum above the saddle to a higher maximum.
inline constexpr double kSeedProminence = 1.0;

/// Splits touching blobs. Seeds are the regional maxima of the distance field
/// (8-neighborhood plateaus); maxima closer than kSeedMergeRadius merge, as do
/// maxima rising less than kSeedProminence above their saddle. Seeds
/// flood in decreasing distance order and pixels reached by two labels become
/// watershed lines (label 0). Labels are 8-connected and numbered in raster
/// order of first encounter.
LabelMap watershed_split(const BinaryMask& mask);

/// 8-connectivity, labels 1..K in raster-scan order of first encounter.
LabelMap connected_components(const BinaryMask& mask);

}  // namespace crowncount
