#include "crowncount/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

namespace crowncount {

namespace {

constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n = 0) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t add() {
        parent_.push_back(parent_.size());
        return parent_.size() - 1;
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            // smaller index stays root
            if (b < a) {
                std::swap(a, b);
            }
            parent_[b] = a;
        }
    }

private:
    std::vector<std::size_t> parent_;
};

// Squared distance to the lower envelope of parabolas rooted at f.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -1e300;
    z[1] = 1e300;
    for (int q = 1; q < n; ++q) {
        double s = 0.0;
        while (true) {
            const int p = v[static_cast<std::size_t>(k)];
            s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
                 (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
                (2.0 * q - 2.0 * p);
            if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = 1e300;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(k) + 1] < q) {
            ++k;
        }
        const int p = v[static_cast<std::size_t>(k)];
        d[static_cast<std::size_t>(q)] = static_cast<double>(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
    }
}

}  // namespace

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> outside(mask.size(), 0);
    std::vector<std::size_t> queue;
    const auto seed = [&](int x, int y) {
        const std::size_t i = mask.index(x, y);
        if (mask[i] == 0 && outside[i] == 0) {
            outside[i] = 1;
            queue.push_back(i);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int x = static_cast<int>(queue[head] % static_cast<std::size_t>(w));
        const int y = static_cast<int>(queue[head] / static_cast<std::size_t>(w));
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        out[i] = (mask[i] != 0 || outside[i] == 0) ? 1 : 0;
    }
    return out;
}

DistanceField squared_distance_transform(const BinaryMask& mask) {
    // Pad with one ring of background so the border convention falls out of the
    // plain transform.
    const int w = mask.width() + 2;
    const int h = mask.height() + 2;
    constexpr double kInf = 1e20;
    std::vector<double> grid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            grid[static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + 1)] =
                mask(x, y) != 0 ? kInf : 0.0;
        }
    }
    const std::size_t longest = static_cast<std::size_t>(std::max(w, h));
    std::vector<double> f(longest), d(longest), z(longest + 1);
    std::vector<int> v(longest);

    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
        }
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) {
            grid[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = d[static_cast<std::size_t>(y)];
        }
    }
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        const std::size_t base = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
        std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(base), w, f.begin());
        edt_1d(f, d, v, z);
        std::copy_n(d.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(base));
    }

    DistanceField out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            out(x, y) = grid[static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + 1)];
        }
    }
    return out;
}

DistanceField distance_transform(const BinaryMask& mask) {
    DistanceField out = squared_distance_transform(mask);
    for (double& v : out.values()) {
        v = std::sqrt(v);
    }
    return out;
}

LabelMap connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::size_t> provisional(mask.size(), 0);
    DisjointSet sets(1);  // slot 0 is background
    // already-visited neighbors in raster order: W, NW, N, NE
    constexpr int kPrevDx[4] = {-1, -1, 0, 1};
    constexpr int kPrevDy[4] = {0, -1, -1, -1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = mask.index(x, y);
            if (mask[i] == 0) {
                continue;
            }
            std::size_t label = 0;
            for (int k = 0; k < 4; ++k) {
                const int nx = x + kPrevDx[k];
                const int ny = y + kPrevDy[k];
                if (!mask.contains(nx, ny)) {
                    continue;
                }
                const std::size_t n = provisional[mask.index(nx, ny)];
                if (n == 0) {
                    continue;
                }
                if (label == 0) {
                    label = n;
                } else {
                    sets.unite(label, n);
                }
            }
            provisional[i] = label == 0 ? sets.add() : label;
        }
    }
    LabelMap out(w, h);
    std::vector<std::int32_t> renumber;
    std::int32_t next = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (provisional[i] == 0) {
            continue;
        }
        const std::size_t root = sets.find(provisional[i]);
        if (renumber.size() <= root) {
            renumber.resize(root + 1, 0);
        }
        if (renumber[root] == 0) {
            renumber[root] = ++next;
        }
        out[i] = renumber[root];
    }
    return out;
}

LabelMap watershed_split(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    const DistanceField sq = squared_distance_transform(mask);

    // Regional maxima: 8-connected plateaus of equal distance with no higher neighbor.
    std::vector<std::int32_t> plateau(mask.size(), 0);
    std::vector<std::size_t> maxima_pixels;
    std::vector<std::size_t> maxima_owner;  // maximum index per entry of maxima_pixels
    std::size_t maxima = 0;
    std::vector<std::size_t> members;
    std::int32_t plateau_id = 0;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (mask[start] == 0 || plateau[start] != 0) {
            continue;
        }
        ++plateau_id;
        const double level = sq[start];
        bool is_max = true;
        members.clear();
        members.push_back(start);
        plateau[start] = plateau_id;
        for (std::size_t head = 0; head < members.size(); ++head) {
            const int x = static_cast<int>(members[head] % static_cast<std::size_t>(w));
            const int y = static_cast<int>(members[head] / static_cast<std::size_t>(w));
            for (int k = 0; k < 8; ++k) {
                const int nx = x + kDx8[k];
                const int ny = y + kDy8[k];
                if (!mask.contains(nx, ny)) {
                    continue;
                }
                const std::size_t n = mask.index(nx, ny);
                if (sq[n] > level) {
                    is_max = false;
                } else if (sq[n] == level && mask[n] != 0 && plateau[n] == 0) {
                    plateau[n] = plateau_id;
                    members.push_back(n);
                }
            }
        }
        if (is_max) {
            for (const std::size_t p : members) {
                maxima_pixels.push_back(p);
                maxima_owner.push_back(maxima);
            }
            ++maxima;
        }
    }

    // Merge maxima with pixels closer than the merge radius.
    DisjointSet groups(maxima);
    std::vector<std::int64_t> owner_grid(mask.size(), -1);
    for (std::size_t k = 0; k < maxima_pixels.size(); ++k) {
        owner_grid[maxima_pixels[k]] = static_cast<std::int64_t>(maxima_owner[k]);
    }
    const int reach = static_cast<int>(std::ceil(kSeedMergeRadius)) - 1;
    const double limit2 = kSeedMergeRadius * kSeedMergeRadius;
    for (std::size_t k = 0; k < maxima_pixels.size(); ++k) {
        const int x = static_cast<int>(maxima_pixels[k] % static_cast<std::size_t>(w));
        const int y = static_cast<int>(maxima_pixels[k] / static_cast<std::size_t>(w));
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                if (dx * dx + dy * dy >= limit2 || !mask.contains(x + dx, y + dy)) {
                    continue;
                }
                const std::int64_t other = owner_grid[mask.index(x + dx, y + dy)];
                if (other >= 0) {
                    groups.unite(maxima_owner[k], static_cast<std::size_t>(other));
                }
            }
        }
    }

    // Merge maxima whose height above the saddle joining them to a higher
    // maximum is below kSeedProminence. Pixels are added in decreasing
    // distance; each component remembers its highest maximum.
    {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i] != 0) {
                order.push_back(i);
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sq[a] > sq[b]; });
        std::vector<std::int64_t> slot(mask.size(), -1);  // pixel -> component node
        DisjointSet components;
        std::vector<double> peak;
        std::vector<std::int64_t> peak_max;  // maximum index of the peak, -1 if none yet
        for (const std::size_t p : order) {
            const double level = std::sqrt(sq[p]);
            const std::size_t node = components.add();
            slot[p] = static_cast<std::int64_t>(node);
            peak.push_back(level);
            peak_max.push_back(owner_grid[p]);
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            for (int k = 0; k < 8; ++k) {
                const int nx = x + kDx8[k];
                const int ny = y + kDy8[k];
                if (!mask.contains(nx, ny) || slot[mask.index(nx, ny)] < 0) {
                    continue;
                }
                std::size_t a = components.find(node);
                std::size_t b = components.find(static_cast<std::size_t>(slot[mask.index(nx, ny)]));
                if (a == b) {
                    continue;
                }
                if (peak_max[a] >= 0 && peak_max[b] >= 0) {
                    // b is the higher component; ties keep the older maximum
                    if (peak[a] > peak[b] || (peak[a] == peak[b] && peak_max[a] < peak_max[b])) {
                        std::swap(a, b);
                    }
                    if (peak[a] - level < kSeedProminence) {
                        groups.unite(static_cast<std::size_t>(peak_max[a]), static_cast<std::size_t>(peak_max[b]));
                    }
                } else if (peak_max[b] < 0) {
                    std::swap(a, b);
                }
                // b carries the surviving peak
                const double top = peak[b];
                const std::int64_t top_max = peak_max[b];
                components.unite(a, b);
                const std::size_t root = components.find(a);
                peak[root] = top;
                peak_max[root] = top_max;
            }
        }
    }

    // Flood from the seeds in decreasing distance, first-in first-out on ties.
    constexpr std::int32_t kLine = -1;
    std::vector<std::int32_t> label(mask.size(), 0);
    std::vector<std::int32_t> group_label(maxima, 0);
    std::int32_t next_label = 0;
    for (std::size_t k = 0; k < maxima_pixels.size(); ++k) {
        const std::size_t root = groups.find(maxima_owner[k]);
        if (group_label[root] == 0) {
            group_label[root] = ++next_label;
        }
        label[maxima_pixels[k]] = group_label[root];
    }

    struct Entry {
        double level;
        std::uint64_t age;
        std::size_t pixel;
        bool operator<(const Entry& o) const {
            if (level != o.level) {
                return level < o.level;
            }
            return age > o.age;
        }
    };
    std::priority_queue<Entry> queue;
    std::vector<std::uint8_t> queued(mask.size(), 0);
    std::uint64_t age = 0;
    const auto push_neighbors = [&](std::size_t p) {
        const int x = static_cast<int>(p % static_cast<std::size_t>(w));
        const int y = static_cast<int>(p / static_cast<std::size_t>(w));
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx8[k];
            const int ny = y + kDy8[k];
            if (!mask.contains(nx, ny)) {
                continue;
            }
            const std::size_t n = mask.index(nx, ny);
            if (mask[n] != 0 && label[n] == 0 && queued[n] == 0) {
                queued[n] = 1;
                queue.push(Entry{sq[n], age++, n});
            }
        }
    };
    for (const std::size_t p : maxima_pixels) {
        push_neighbors(p);
    }
    while (!queue.empty()) {
        const Entry top = queue.top();
        queue.pop();
        const int x = static_cast<int>(top.pixel % static_cast<std::size_t>(w));
        const int y = static_cast<int>(top.pixel / static_cast<std::size_t>(w));
        std::int32_t found = 0;
        bool conflict = false;
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx8[k];
            const int ny = y + kDy8[k];
            if (!mask.contains(nx, ny)) {
                continue;
            }
            const std::int32_t l = label[mask.index(nx, ny)];
            if (l > 0) {
                if (found == 0) {
                    found = l;
                } else if (l != found) {
                    conflict = true;
                }
            }
        }
        if (conflict || found == 0) {
            label[top.pixel] = kLine;
            continue;
        }
        label[top.pixel] = found;
        push_neighbors(top.pixel);
    }

    BinaryMask labeled(w, h);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        labeled[i] = label[i] > 0 ? 1 : 0;
    }
    return connected_components(labeled);
}

}  // namespace crowncount
