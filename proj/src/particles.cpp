#include "crowncount/particles.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace crowncount {

double Detection::equivalent_radius() const { return std::sqrt(area / std::numbers::pi); }

namespace {

struct Moments {
    double n = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    double probability = 0.0;

    void add(double x, double y) {
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
};

EllipseFit ellipse_from_central(double n, double mu20, double mu02, double mu11) {
    // each pixel is a unit square: add its own second moment
    mu20 += 1.0 / 12.0;
    mu02 += 1.0 / 12.0;
    const double common = 0.5 * (mu20 + mu02);
    const double diff = std::sqrt(0.25 * (mu20 - mu02) * (mu20 - mu02) + mu11 * mu11);
    const double l1 = common + diff;
    const double l2 = std::max(common - diff, 1e-12);
    const double ratio = std::sqrt(l1 / l2);
    EllipseFit fit;
    fit.major = 2.0 * std::sqrt(n / std::numbers::pi * ratio);
    fit.minor = 2.0 * std::sqrt(n / std::numbers::pi / ratio);
    double angle = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02) * 180.0 / std::numbers::pi;
    if (angle < 0.0) {
        angle += 180.0;
    }
    fit.angle = angle >= 180.0 ? 0.0 : angle;
    return fit;
}

}  // namespace

EllipseFit fit_ellipse(std::span<const PixelCoord> pixels) {
    require(!pixels.empty(), "cannot fit an ellipse to an empty pixel list");
    const double ox = pixels.front().x;
    const double oy = pixels.front().y;
    Moments m;
    for (const PixelCoord& p : pixels) {
        m.add(p.x - ox, p.y - oy);
    }
    const double cx = m.sx / m.n;
    const double cy = m.sy / m.n;
    return ellipse_from_central(m.n, m.sxx / m.n - cx * cx, m.syy / m.n - cy * cy, m.sxy / m.n - cx * cy);
}

std::vector<Detection> analyze_particles(const LabelMap& labels, double min_radius,
                                         const ProbabilityMap* probability) {
    require(min_radius >= 0.0, "min_radius must be non-negative");
    if (probability != nullptr) {
        require(probability->same_shape(labels), "probability map size does not match the label map");
    }
    const std::int32_t k = label_count(labels);
    std::vector<Moments> blobs(static_cast<std::size_t>(k) + 1);
    std::vector<std::pair<int, int>> origin(static_cast<std::size_t>(k) + 1, {-1, -1});
    std::vector<std::int32_t> encounter;  // labels in raster order of first pixel
    for (int y = 0; y < labels.height(); ++y) {
        for (int x = 0; x < labels.width(); ++x) {
            const std::int32_t l = labels(x, y);
            if (l <= 0) {
                continue;
            }
            auto& o = origin[static_cast<std::size_t>(l)];
            if (o.first < 0) {
                o = {x, y};
                encounter.push_back(l);
            }
            Moments& b = blobs[static_cast<std::size_t>(l)];
            b.add(x - o.first, y - o.second);
            if (probability != nullptr) {
                b.probability += (*probability)(x, y);
            }
        }
    }

    std::vector<Detection> out;
    for (const std::int32_t l : encounter) {
        const Moments& b = blobs[static_cast<std::size_t>(l)];
        const double area = b.n;
        if (std::sqrt(area / std::numbers::pi) < min_radius) {
            continue;
        }
        const double cx = b.sx / b.n;
        const double cy = b.sy / b.n;
        const EllipseFit e = ellipse_from_central(b.n, b.sxx / b.n - cx * cx, b.syy / b.n - cy * cy,
                                                  b.sxy / b.n - cx * cy);
        Detection d;
        d.id = static_cast<int>(out.size()) + 1;
        d.centroid_x = cx + origin[static_cast<std::size_t>(l)].first;
        d.centroid_y = cy + origin[static_cast<std::size_t>(l)].second;
        d.area = area;
        d.major = e.major;
        d.minor = e.minor;
        d.angle = e.angle;
        d.score = probability != nullptr ? b.probability / b.n : 1.0;
        out.push_back(d);
    }
    return out;
}

void write_detections_csv(std::ostream& out, std::span<const Detection> detections) {
    out << "id,x,y,area,major,minor,angle,score\n";
    char line[256];
    for (const Detection& d : detections) {
        std::snprintf(line, sizeof(line), "%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n", d.id, d.centroid_x, d.centroid_y,
                      d.area, d.major, d.minor, d.angle, d.score);
        out << line;
    }
}

void save_detections_csv(const std::filesystem::path& path, std::span<const Detection> detections) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_detections_csv(out, detections);
}

std::vector<Detection> read_detections_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,x,y,area,major,minor,angle,score", 0) != 0) {
        throw FormatError("detections CSV must start with the header id,x,y,area,major,minor,angle,score");
    }
    std::vector<Detection> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        Detection d;
        char extra = 0;
        const int fields = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf%c", &d.id, &d.centroid_x,
                                       &d.centroid_y, &d.area, &d.major, &d.minor, &d.angle, &d.score, &extra);
        if (fields < 8 || (fields == 9 && extra != ',')) {
            throw FormatError("malformed detections CSV at line " + std::to_string(line_no));
        }
        out.push_back(d);
    }
    return out;
}

std::vector<Detection> load_detections_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_detections_csv(in);
}

}  // namespace crowncount
