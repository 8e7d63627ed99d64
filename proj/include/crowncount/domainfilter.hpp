#pragma once

// Plantation domain rules applied to counted crowns:
//   radius   equivalent radius must lie in [radius_min, radius_max]
//   spacing  no two kept crowns closer than min_spacing
//   row      a crown must line up with two of its nearest neighbors

#include <span>
#include <string_view>
#include <vector>

#include "crowncount/particles.hpp"

namespace crowncount {

struct ConstraintConfig {
    double radius_min = 0.0;
    double radius_max = 1e9;
    double min_spacing = 1.0;
    double row_tolerance = 3.0;
    int neighbor_k = 4;
    bool enable_row_rule = true;

    void validate() const;
};

enum class RemovalReason { radius, spacing, row };

std::string_view to_string(RemovalReason reason);
RemovalReason parse_removal_reason(std::string_view text);

struct Removal {
    Detection detection;
    RemovalReason reason;
};

struct FilterReport {
    std::vector<Detection> kept;
    std::vector<Removal> removed;
    std::size_t removed_count = 0;
};

/// Radius, then spacing, then row passes.
///
/// Spacing visits crowns by priority (higher score, then larger area, then
/// lower id) and drops any crown within min_spacing of one already kept, so
/// every conflicting pair loses its lower-priority member.
///
/// Row: a crown stays if some pair among its neighbor_k nearest kept
/// neighbors defines a line within row_tolerance of it. Crowns with fewer than
/// two neighbors inside 3*min_spacing are exempt. The pass repeats until no
/// crown is dropped, so the kept set is a fixpoint of all three rules.
FilterReport apply_constraints(std::span<const Detection> detections, const ConstraintConfig& config);

inline std::size_t count_after_filter(const FilterReport& report) { return report.kept.size(); }

/// Perpendicular distance from p to the line through a and b (distance to a when a == b).
double point_line_distance(double px, double py, double ax, double ay, double bx, double by);

/// Particles CSV with an extra `reason` column.
void save_removals_csv(const std::filesystem::path& path, std::span<const Removal> removed);

}  // namespace crowncount
