#include "crowncount/segmentation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>

#include "crowncount/util.hpp"

namespace crowncount {

TrainingSet extract_training(const FeatureStack& stack, const AnnotationMask& mask, int max_per_class,
                             std::uint64_t seed) {
    require(max_per_class >= 1, "max_per_class must be at least 1");
    if (!mask.same_shape(stack.width(), stack.height())) {
        throw DataError("annotation mask size does not match the image");
    }
    std::array<std::vector<std::size_t>, 2> pools;  // [0] non-tree, [1] tree
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == Mark::tree) {
            pools[1].push_back(i);
        } else if (mask[i] == Mark::non_tree) {
            pools[0].push_back(i);
        }
    }
    if (pools[1].empty()) {
        throw DataError("annotation mask has no tree pixels");
    }
    if (pools[0].empty()) {
        throw DataError("annotation mask has no non-tree pixels");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::size_t, int>> chosen;
    for (int label = 0; label < 2; ++label) {
        auto& pool = pools[static_cast<std::size_t>(label)];
        const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(max_per_class));
        // partial Fisher-Yates: the first `take` entries become a uniform sample
        for (std::size_t i = 0; i < take && take < pool.size(); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        for (std::size_t i = 0; i < take; ++i) {
            chosen.emplace_back(pool[i], label);
        }
    }
    std::sort(chosen.begin(), chosen.end());

    TrainingSet set;
    set.feature_names = stack.names();
    set.features = Matrix(chosen.size(), stack.feature_count());
    set.labels.reserve(chosen.size());
    for (std::size_t r = 0; r < chosen.size(); ++r) {
        stack.gather(chosen[r].first, set.features.row(r));
        set.labels.push_back(chosen[r].second);
    }
    return set;
}

ClassifiedImage classify_image(const ClassifierModel& model, const FeatureStack& stack, unsigned threads) {
    if (stack.feature_count() != model.feature_count()) {
        throw DataError("feature stack has " + std::to_string(stack.feature_count()) + " planes, model expects " +
                        std::to_string(model.feature_count()));
    }
    const auto start = std::chrono::steady_clock::now();
    ProbabilityMap map(stack.width(), stack.height());
    const auto height = static_cast<std::size_t>(stack.height());
    const auto width = static_cast<std::size_t>(stack.width());
    parallel_for(
        0, height,
        [&](std::size_t y) {
            std::vector<double> x(stack.feature_count());
            for (std::size_t i = y * width; i < (y + 1) * width; ++i) {
                stack.gather(i, x);
                map[i] = model.predict_p1(x);
            }
        },
        threads == 0 ? default_threads() : threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return ClassifiedImage{std::move(map), seconds};
}

BinaryMask binarize(const ProbabilityMap& map, double threshold) {
    require(threshold > 0.0 && threshold < 1.0, "binarization threshold must lie in (0, 1)");
    BinaryMask mask(map.width(), map.height());
    for (std::size_t i = 0; i < map.size(); ++i) {
        mask[i] = map[i] >= threshold ? 1 : 0;
    }
    return mask;
}

AnnotationMask load_annotation(const std::filesystem::path& path) {
    const Grid<std::uint8_t> indices = load_index_image(path);
    AnnotationMask mask(indices.width(), indices.height());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] > 2) {
            throw FormatError(path.string() + ": annotation values must be 0, 1 or 2");
        }
        mask[i] = static_cast<Mark>(indices[i]);
    }
    return mask;
}

void save_annotation(const AnnotationMask& mask, const std::filesystem::path& path) {
    static constexpr std::array<Rgb, 3> palette{Rgb{0, 0, 0}, Rgb{0, 200, 0}, Rgb{200, 0, 200}};
    Grid<std::uint8_t> indices(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        indices[i] = static_cast<std::uint8_t>(mask[i]);
    }
    save_indexed(indices, palette, path);
}

void save_probability(const ProbabilityMap& map, const std::filesystem::path& path) {
    Grid<std::uint8_t> gray(map.width(), map.height());
    for (std::size_t i = 0; i < map.size(); ++i) {
        gray[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(map[i], 0.0, 1.0)));
    }
    save_gray8(gray, path);
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    Grid<std::uint8_t> gray(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        gray[i] = mask[i] != 0 ? 255 : 0;
    }
    save_gray8(gray, path);
}

}  // namespace crowncount
