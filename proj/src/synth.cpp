#include "crowncount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "crowncount/util.hpp"

namespace crowncount {

void PlantationSpec::validate() const {
    require(rows >= 1 && cols >= 1, "plantation needs at least one row and one column");
    require(std::isfinite(spacing) && spacing > 0.0, "plantation spacing must be positive");
    require(crown_radius_min > 0.0 && crown_radius_min <= crown_radius_max, "crown radius range is invalid");
    require(spacing > 2.0 * crown_radius_max, "spacing must exceed twice the maximum crown radius");
    require(jitter >= 0.0 && jitter < 0.5 * spacing, "jitter must lie in [0, spacing / 2)");
    require(failure_prob >= 0.0 && failure_prob <= 1.0, "failure_prob must lie in [0, 1]");
    require(noise_sigma >= 0.0, "noise_sigma must be non-negative");
    require(clutter_count >= 0, "clutter_count must be non-negative");
    const double width = cols * spacing;
    const double height = rows * spacing;
    require(width <= 20000.0 && height <= 20000.0, "plantation image would exceed 20000 px per side");
}

bool Crown::contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const double u = (dx * c + dy * s) / semi_major;
    const double v = (-dx * s + dy * c) / semi_minor;
    return u * u + v * v <= 1.0;
}

namespace {

/// Smooth value noise in [-1, 1]: random lattice values, bilinear blend.
class ValueNoise {
public:
    ValueNoise(int width, int height, double step, std::uint64_t seed)
        : step_(step), nx_(static_cast<int>(width / step) + 2), ny_(static_cast<int>(height / step) + 2) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        lattice_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
        for (double& v : lattice_) {
            v = u(rng);
        }
    }

    double operator()(double x, double y) const {
        const double gx = x / step_;
        const double gy = y / step_;
        const int x0 = std::clamp(static_cast<int>(gx), 0, nx_ - 2);
        const int y0 = std::clamp(static_cast<int>(gy), 0, ny_ - 2);
        const double fx = std::clamp(gx - x0, 0.0, 1.0);
        const double fy = std::clamp(gy - y0, 0.0, 1.0);
        const double a = at(x0, y0) * (1 - fx) + at(x0 + 1, y0) * fx;
        const double b = at(x0, y0 + 1) * (1 - fx) + at(x0 + 1, y0 + 1) * fx;
        return a * (1 - fy) + b * fy;
    }

private:
    double at(int x, int y) const { return lattice_[static_cast<std::size_t>(y) * nx_ + x]; }

    double step_;
    int nx_;
    int ny_;
    std::vector<double> lattice_;
};

struct Blob {
    Crown shape;
    Rgb color;
};

// Distractor palette: rock, shadow, straw.
constexpr Rgb kClutterColors[] = {{140, 140, 135}, {50, 45, 40}, {185, 165, 110}};

std::uint8_t to_channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void paint_ellipse(AnnotationMask& mask, const Crown& shape, Mark mark) {
    const double reach = shape.semi_major;
    const int x0 = std::max(0, static_cast<int>(std::floor(shape.cx - reach)));
    const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(shape.cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(shape.cy - reach)));
    const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(shape.cy + reach)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (shape.contains(x + 0.5, y + 0.5)) {
                mask(x, y) = mark;
            }
        }
    }
}

}  // namespace

SyntheticScene generate(const PlantationSpec& spec) {
    spec.validate();
    const int width = static_cast<int>(std::lround(spec.cols * spec.spacing));
    const int height = static_cast<int>(std::lround(spec.rows * spec.spacing));

    std::mt19937_64 layout(derive_seed(spec.seed, "synth/layout"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticScene scene{RasterImage(width, height), {}, AnnotationMask(width, height, Mark::unlabeled), {}};

    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            // every cell draws the same number of values so one failure does
            // not shift the layout of the rest
            const bool missing = unit(layout) < spec.failure_prob;
            const double jx = (2.0 * unit(layout) - 1.0) * spec.jitter;
            const double jy = (2.0 * unit(layout) - 1.0) * spec.jitter;
            const double radius = spec.crown_radius_min + unit(layout) * (spec.crown_radius_max - spec.crown_radius_min);
            const double aspect = 0.8 + 0.2 * unit(layout);
            const double angle = unit(layout) * std::numbers::pi;
            if (missing) {
                continue;
            }
            const double cx = (c + 0.5) * spec.spacing + jx;
            const double cy = (r + 0.5) * spec.spacing + jy;
            scene.truth.centers.push_back({cx, cy});
            scene.crowns.push_back(Crown{cx, cy, radius, radius * aspect, angle});
        }
    }

    // Clutter sits on soil: rejection-sample centers away from every crown.
    std::vector<Blob> clutter;
    for (int i = 0, attempts = 0; i < spec.clutter_count && attempts < 100 * (spec.clutter_count + 1); ++attempts) {
        const double radius = 3.0 + 3.0 * unit(layout);
        const double cx = unit(layout) * width;
        const double cy = unit(layout) * height;
        const auto color = kClutterColors[static_cast<std::size_t>(unit(layout) * 3.0) % 3];
        const double angle = unit(layout) * std::numbers::pi;
        const bool overlaps = std::any_of(scene.crowns.begin(), scene.crowns.end(), [&](const Crown& k) {
            return std::hypot(k.cx - cx, k.cy - cy) < k.semi_major + radius + 2.0;
        });
        if (overlaps) {
            continue;
        }
        clutter.push_back(Blob{Crown{cx, cy, radius, radius * 0.6, angle}, color});
        ++i;
    }

    const ValueNoise soil_texture(width, height, 9.0, derive_seed(spec.seed, "synth/soil"));
    const ValueNoise leaf_texture(width, height, 4.0, derive_seed(spec.seed, "synth/leaf"));

    // crown lookup by grid cell; a jittered crown may spill into a neighbor cell
    const auto cell_of = [&](double v) { return static_cast<int>(std::floor(v / spec.spacing)); };
    std::vector<int> crown_at(static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols), -1);
    for (std::size_t i = 0; i < scene.crowns.size(); ++i) {
        const int c = std::clamp(cell_of(scene.crowns[i].cx), 0, spec.cols - 1);
        const int r = std::clamp(cell_of(scene.crowns[i].cy), 0, spec.rows - 1);
        crown_at[static_cast<std::size_t>(r) * spec.cols + c] = static_cast<int>(i);
    }

    const std::uint64_t noise_seed = derive_seed(spec.seed, "synth/noise");
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        std::mt19937_64 rng(derive_seed(noise_seed, static_cast<std::uint64_t>(y)));
        std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5;
            const double py = y + 0.5;
            const double soil = 14.0 * soil_texture(px, py);
            double rgb[3] = {kSoilColor.r + soil, kSoilColor.g + soil, kSoilColor.b + 0.6 * soil};

            const Crown* crown = nullptr;
            const int cc = cell_of(px);
            const int cr = cell_of(py);
            for (int r = std::max(0, cr - 1); r <= std::min(spec.rows - 1, cr + 1) && crown == nullptr; ++r) {
                for (int c = std::max(0, cc - 1); c <= std::min(spec.cols - 1, cc + 1); ++c) {
                    const int k = crown_at[static_cast<std::size_t>(r) * spec.cols + c];
                    if (k >= 0 && scene.crowns[static_cast<std::size_t>(k)].contains(px, py)) {
                        crown = &scene.crowns[static_cast<std::size_t>(k)];
                        break;
                    }
                }
            }
            if (crown != nullptr) {
                const double rho2 = std::pow(std::hypot(px - crown->cx, py - crown->cy) / crown->semi_major, 2.0);
                const double shade = 1.0 - 0.2 * rho2;
                const double leaf = 12.0 * leaf_texture(px, py);
                rgb[0] = (kTreeColor.r + 0.5 * leaf) * shade;
                rgb[1] = (kTreeColor.g + leaf) * shade;
                rgb[2] = (kTreeColor.b + 0.5 * leaf) * shade;
            } else {
                for (const Blob& b : clutter) {
                    if (b.shape.contains(px, py)) {
                        rgb[0] = b.color.r;
                        rgb[1] = b.color.g;
                        rgb[2] = b.color.b;
                        break;
                    }
                }
            }
            Rgb& out = scene.image(x, y);
            const double n[3] = {noise(rng), noise(rng), noise(rng)};
            const double scale = spec.noise_sigma > 0.0 ? 1.0 : 0.0;
            out.r = to_channel(rgb[0] + scale * n[0]);
            out.g = to_channel(rgb[1] + scale * n[1]);
            out.b = to_channel(rgb[2] + scale * n[2]);
        }
    });

    // Annotation: interiors of a random subset of trees, and the soil of a
    // random subset of grid cells kept 2 px clear of every crown.
    std::mt19937_64 pick(derive_seed(spec.seed, "synth/annotation"));
    std::vector<std::size_t> order(scene.crowns.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), pick);
    const auto annotated = static_cast<std::size_t>(std::ceil(kAnnotatedTreeFraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < annotated; ++i) {
        Crown core = scene.crowns[order[i]];
        core.semi_major *= 0.9;
        core.semi_minor *= 0.9;
        paint_ellipse(scene.annotation, core, Mark::tree);
    }

    std::bernoulli_distribution take_cell(kAnnotatedTreeFraction);
    std::vector<char> soil_cell(static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols), 0);
    for (char& chosen : soil_cell) {
        chosen = take_cell(pick) ? 1 : 0;
    }
    if (std::find(soil_cell.begin(), soil_cell.end(), 1) == soil_cell.end()) {
        soil_cell.front() = 1;
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int c = std::clamp(cell_of(x + 0.5), 0, spec.cols - 1);
            const int r = std::clamp(cell_of(y + 0.5), 0, spec.rows - 1);
            if (soil_cell[static_cast<std::size_t>(r) * spec.cols + c] == 0) {
                continue;
            }
            bool near_crown = false;
            for (int rr = std::max(0, r - 1); rr <= std::min(spec.rows - 1, r + 1) && !near_crown; ++rr) {
                for (int cc = std::max(0, c - 1); cc <= std::min(spec.cols - 1, c + 1); ++cc) {
                    const int k = crown_at[static_cast<std::size_t>(rr) * spec.cols + cc];
                    if (k < 0) {
                        continue;
                    }
                    Crown margin = scene.crowns[static_cast<std::size_t>(k)];
                    margin.semi_major += 2.0;
                    margin.semi_minor += 2.0;
                    if (margin.contains(x + 0.5, y + 0.5)) {
                        near_crown = true;
                        break;
                    }
                }
            }
            if (!near_crown) {
                scene.annotation(x, y) = Mark::non_tree;
            }
        }
    }
    return scene;
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
    out << "x,y\n";
    char line[64];
    for (const GroundTruthCenter& c : truth.centers) {
        std::snprintf(line, sizeof(line), "%.3f,%.3f\n", c.x, c.y);
        out << line;
    }
}

void save_truth_csv(const std::filesystem::path& path, const GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_truth_csv(out, truth);
}

GroundTruth read_truth_csv(std::istream& in) {
    GroundTruth truth;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (line_no == 1 && line == "x,y")) {
            continue;
        }
        GroundTruthCenter c;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf%c", &c.x, &c.y, &extra) != 2) {
            throw FormatError("malformed ground-truth CSV at line " + std::to_string(line_no));
        }
        truth.centers.push_back(c);
    }
    return truth;
}

GroundTruth load_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_truth_csv(in);
}

}  // namespace crowncount
