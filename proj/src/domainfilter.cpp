#include "crowncount/domainfilter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>

namespace crowncount {

void ConstraintConfig::validate() const {
    require(std::isfinite(radius_min) && std::isfinite(radius_max) && radius_min >= 0.0 && radius_min < radius_max,
            "constraints need 0 <= radius_min < radius_max");
    require(std::isfinite(min_spacing) && min_spacing > 0.0, "constraints need min_spacing > 0");
    require(std::isfinite(row_tolerance) && row_tolerance >= 0.0, "constraints need row_tolerance >= 0");
    require(neighbor_k >= 2, "constraints need neighbor_k >= 2");
}

std::string_view to_string(RemovalReason reason) {
    switch (reason) {
        case RemovalReason::radius: return "radius";
        case RemovalReason::spacing: return "spacing";
        case RemovalReason::row: return "row";
    }
    return "unknown";
}

RemovalReason parse_removal_reason(std::string_view text) {
    for (const RemovalReason r : {RemovalReason::radius, RemovalReason::spacing, RemovalReason::row}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw FormatError("unknown removal reason '" + std::string(text) + "'");
}

double point_line_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) {
        return std::hypot(px - ax, py - ay);
    }
    return std::abs(dx * (py - ay) - dy * (px - ax)) / len;
}

namespace {

/// Uniform bucket grid over detection centers.
class SpatialGrid {
public:
    explicit SpatialGrid(double cell) : cell_(cell) {}

    void insert(std::size_t item, double x, double y) { buckets_[key(cell_of(x), cell_of(y))].push_back({item, x, y}); }

    template <class Fn>
    void for_each_within(double x, double y, double radius, Fn&& fn) const {
        const long reach = static_cast<long>(std::ceil(radius / cell_));
        const long cx = cell_of(x);
        const long cy = cell_of(y);
        for (long gy = cy - reach; gy <= cy + reach; ++gy) {
            for (long gx = cx - reach; gx <= cx + reach; ++gx) {
                const auto it = buckets_.find(key(gx, gy));
                if (it == buckets_.end()) {
                    continue;
                }
                for (const Entry& e : it->second) {
                    const double d = std::hypot(e.x - x, e.y - y);
                    if (d < radius) {
                        fn(e.item, d);
                    }
                }
            }
        }
    }

private:
    struct Entry {
        std::size_t item;
        double x;
        double y;
    };

    long cell_of(double v) const { return static_cast<long>(std::floor(v / cell_)); }
    static std::int64_t key(long gx, long gy) { return (static_cast<std::int64_t>(gx) << 32) ^ (gy & 0xffffffffL); }

    double cell_;
    std::unordered_map<std::int64_t, std::vector<Entry>> buckets_;
};

// true when a outranks b for keeping
bool higher_priority(const Detection& a, const Detection& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.area != b.area) {
        return a.area > b.area;
    }
    return a.id < b.id;
}

bool lies_on_row(std::size_t self, const std::vector<Detection>& kept, const ConstraintConfig& config,
                 const SpatialGrid& grid) {
    const Detection& d = kept[self];
    std::size_t close = 0;
    grid.for_each_within(d.centroid_x, d.centroid_y, 3.0 * config.min_spacing, [&](std::size_t other, double) {
        if (other != self) {
            ++close;
        }
    });
    if (close < 2) {
        return true;  // isolated crowns are exempt
    }

    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) {
        if (j != self) {
            by_distance.emplace_back(std::hypot(kept[j].centroid_x - d.centroid_x, kept[j].centroid_y - d.centroid_y), j);
        }
    }
    const auto k = std::min(by_distance.size(), static_cast<std::size_t>(config.neighbor_k));
    std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k), by_distance.end(),
                      [&](const auto& a, const auto& b) {
                          if (a.first != b.first) {
                              return a.first < b.first;
                          }
                          return kept[a.second].id < kept[b.second].id;
                      });
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            const Detection& p = kept[by_distance[a].second];
            const Detection& q = kept[by_distance[b].second];
            if (point_line_distance(d.centroid_x, d.centroid_y, p.centroid_x, p.centroid_y, q.centroid_x,
                                    q.centroid_y) <= config.row_tolerance) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

FilterReport apply_constraints(std::span<const Detection> detections, const ConstraintConfig& config) {
    config.validate();
    FilterReport report;

    // radius
    std::vector<Detection> candidates;
    for (const Detection& d : detections) {
        const double r = d.equivalent_radius();
        if (r < config.radius_min || r > config.radius_max) {
            report.removed.push_back({d, RemovalReason::radius});
        } else {
            candidates.push_back(d);
        }
    }

    // spacing
    std::sort(candidates.begin(), candidates.end(), higher_priority);
    std::vector<Detection> kept;
    {
        SpatialGrid grid(config.min_spacing);
        for (const Detection& d : candidates) {
            bool conflict = false;
            grid.for_each_within(d.centroid_x, d.centroid_y, config.min_spacing,
                                 [&](std::size_t, double) { conflict = true; });
            if (conflict) {
                report.removed.push_back({d, RemovalReason::spacing});
            } else {
                grid.insert(kept.size(), d.centroid_x, d.centroid_y);
                kept.push_back(d);
            }
        }
    }

    // row, repeated until stable
    if (config.enable_row_rule) {
        while (true) {
            SpatialGrid grid(config.min_spacing);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                grid.insert(i, kept[i].centroid_x, kept[i].centroid_y);
            }
            std::vector<Detection> next;
            std::size_t dropped = 0;
            for (std::size_t i = 0; i < kept.size(); ++i) {
                if (lies_on_row(i, kept, config, grid)) {
                    next.push_back(kept[i]);
                } else {
                    report.removed.push_back({kept[i], RemovalReason::row});
                    ++dropped;
                }
            }
            kept = std::move(next);
            if (dropped == 0) {
                break;
            }
        }
    }

    std::sort(kept.begin(), kept.end(), [](const Detection& a, const Detection& b) { return a.id < b.id; });
    report.kept = std::move(kept);
    report.removed_count = report.removed.size();
    return report;
}

void save_removals_csv(const std::filesystem::path& path, std::span<const Removal> removed) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "id,x,y,area,major,minor,angle,score,reason\n";
    char line[256];
    for (const Removal& r : removed) {
        const Detection& d = r.detection;
        std::snprintf(line, sizeof(line), "%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,", d.id, d.centroid_x, d.centroid_y,
                      d.area, d.major, d.minor, d.angle, d.score);
        out << line << to_string(r.reason) << '\n';
    }
}

}  // namespace crowncount
