#include <algorithm>
#include <random>

#include "crowncount/segmentation.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crowncount;

namespace {

FeatureStack ramp_stack(int w, int h) {
    FeatureStack stack(w, h);
    GrayPlane a(w, h), b(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            a(x, y) = x;
            b(x, y) = 100.0 * y;
        }
    }
    stack.add("a", std::move(a));
    stack.add("b", std::move(b));
    return stack;
}

// Marks the first `trees` pixels as tree and the next `others` as non-tree.
AnnotationMask marks(int w, int h, int trees, int others) {
    AnnotationMask mask(w, h, Mark::unlabeled);
    for (int i = 0; i < trees + others; ++i) {
        mask[static_cast<std::size_t>(i)] = i < trees ? Mark::tree : Mark::non_tree;
    }
    return mask;
}

std::size_t count_label(const TrainingSet& set, int label) {
    return static_cast<std::size_t>(std::count(set.labels.begin(), set.labels.end(), label));
}

RasterImage noisy_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> v(0, 255);
    RasterImage image(w, h);
    for (auto& p : image.values()) {
        p = Rgb{static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng))};
    }
    return image;
}

}  // namespace

TEST_CASE("extract_training caps each class") {
    const FeatureStack stack = ramp_stack(10, 10);
    const TrainingSet set = extract_training(stack, marks(10, 10, 10, 10), 5, 1);
    CHECK(set.size() == 10);
    CHECK(count_label(set, 1) == 5);
    CHECK(count_label(set, 0) == 5);
    CHECK(set.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("extract_training takes every pixel of a small class") {
    const FeatureStack stack = ramp_stack(20, 20);
    const TrainingSet set = extract_training(stack, marks(20, 20, 3, 100), 50, 1);
    CHECK(set.size() == 53);
    CHECK(count_label(set, 1) == 3);
    CHECK(count_label(set, 0) == 50);
}

TEST_CASE("extract_training reads features in plane order") {
    const FeatureStack stack = ramp_stack(8, 6);
    const TrainingSet set = extract_training(stack, marks(8, 6, 20, 20), 100, 9);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double x = set.features(i, 0);
        const double y = set.features(i, 1) / 100.0;
        const std::size_t pixel = static_cast<std::size_t>(y) * 8 + static_cast<std::size_t>(x);
        CHECK(set.labels[i] == (pixel < 20 ? 1 : 0));
    }
}

TEST_CASE("extract_training errors") {
    const FeatureStack stack = ramp_stack(6, 6);
    CHECK_THROWS_AS(extract_training(stack, marks(6, 6, 0, 10), 5, 1), DataError);
    CHECK_THROWS_AS(extract_training(stack, marks(6, 6, 10, 0), 5, 1), DataError);
    CHECK_THROWS_AS(extract_training(stack, marks(5, 6, 3, 3), 5, 1), DataError);
    CHECK_THROWS_AS(extract_training(stack, marks(6, 6, 3, 3), 0, 1), PreconditionError);
}

TEST_CASE("extract_training is reproducible and keeps class counts across seeds") {
    const FeatureStack stack = ramp_stack(30, 30);
    const AnnotationMask mask = marks(30, 30, 300, 500);
    const TrainingSet a = extract_training(stack, mask, 40, 7);
    const TrainingSet b = extract_training(stack, mask, 40, 7);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    const TrainingSet c = extract_training(stack, mask, 40, 8);
    CHECK(count_label(c, 1) == count_label(a, 1));
    CHECK(count_label(c, 0) == count_label(a, 0));
    CHECK_FALSE(c.features == a.features);
}

TEST_CASE("1-NN trained on a uniform tree color gives p_tree 1 everywhere") {
    RasterImage image(12, 9, Rgb{30, 160, 40});
    const FeatureStack uniform = build_stack(image, FeatureConfig{});
    // train on the uniform color as tree and a different color as non-tree
    RasterImage other(12, 9, Rgb{200, 150, 100});
    const FeatureStack soil = build_stack(other, FeatureConfig{});
    TrainingSet set;
    set.features = Matrix(0, uniform.feature_count());
    std::vector<double> row(uniform.feature_count());
    uniform.gather(0, row);
    set.features.append_row(row);
    soil.gather(0, row);
    set.features.append_row(row);
    set.labels = {1, 0};
    set.feature_names = uniform.names();
    ClassifierSpec spec;
    spec.kind = ClassifierKind::one_nn;
    const ClassifiedImage out = classify_image(fit(spec, set), uniform);
    for (const double p : out.probability.values()) {
        CHECK(p == 1.0);
    }
    CHECK(out.seconds >= 0.0);
}

TEST_CASE("classify_image is the pointwise prediction") {
    const RasterImage image = noisy_image(2, 2, 3);
    const FeatureStack stack = build_stack(image, FeatureConfig{});
    AnnotationMask mask(2, 2, Mark::tree);
    mask(1, 1) = Mark::non_tree;
    mask(0, 1) = Mark::non_tree;
    ClassifierSpec spec;
    spec.kind = ClassifierKind::gaussian_nb;
    const ClassifierModel model = fit(spec, extract_training(stack, mask, 10, 1));
    const ClassifiedImage out = classify_image(model, stack);
    std::vector<double> x(stack.feature_count());
    for (std::size_t i = 0; i < 4; ++i) {
        stack.gather(i, x);
        CHECK(out.probability[i] == model.predict_proba(x).p1);
    }

    // spot checks on a larger image with several threads
    const RasterImage big = noisy_image(40, 30, 4);
    const FeatureStack big_stack = build_stack(big, FeatureConfig{});
    const ClassifiedImage threaded = classify_image(model, big_stack, 3);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, big_stack.width() * big_stack.height() - 1);
    for (int k = 0; k < 50; ++k) {
        const std::size_t i = pick(rng);
        big_stack.gather(i, x);
        CHECK(threaded.probability[i] == model.predict_proba(x).p1);
    }

    FeatureStack wrong(2, 2);
    wrong.add("only", GrayPlane(2, 2));
    CHECK_THROWS_AS(classify_image(model, wrong), DataError);
}

TEST_CASE("parallel and sequential forests give bit-identical maps") {
    const RasterImage image = noisy_image(32, 24, 6);
    const FeatureStack stack = build_stack(image, FeatureConfig{});
    AnnotationMask mask(32, 24, Mark::unlabeled);
    for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 32; ++x) {
            if (x < 6) mask(x, y) = Mark::tree;
            if (x > 25) mask(x, y) = Mark::non_tree;
        }
    }
    const TrainingSet set = extract_training(stack, mask, 100, 2);
    ClassifierSpec seq;
    seq.kind = ClassifierKind::random_forest;
    seq.seed = 99;
    seq.hyperparameters = {{"trees", 20}};
    ClassifierSpec par = seq;
    par.parallel = true;
    const ClassifiedImage a = classify_image(fit(seq, set), stack, 1);
    const ClassifiedImage b = classify_image(fit(par, set), stack, 4);
    CHECK(a.probability == b.probability);
}

TEST_CASE("binarize uses the >= rule") {
    CHECK(testing::foreground(binarize(ProbabilityMap(4, 3, 0.7))) == 12);
    CHECK(testing::foreground(binarize(ProbabilityMap(4, 3, 0.5))) == 12);
    CHECK(testing::foreground(binarize(ProbabilityMap(4, 3, 0.7), 0.9)) == 0);
    CHECK_THROWS_AS(binarize(ProbabilityMap(1, 1, 0.5), 0.0), PreconditionError);
    CHECK_THROWS_AS(binarize(ProbabilityMap(1, 1, 0.5), 1.0), PreconditionError);
}

TEST_CASE("annotation and probability PNG files") {
    testing::TempDir dir;
    AnnotationMask mask(5, 4, Mark::unlabeled);
    mask(1, 1) = Mark::tree;
    mask(3, 2) = Mark::non_tree;
    save_annotation(mask, dir / "a.png");
    CHECK(load_annotation(dir / "a.png") == mask);

    Grid<std::uint8_t> bad(2, 2, std::vector<std::uint8_t>{0, 1, 2, 3});
    save_gray8(bad, dir / "bad.png");
    CHECK_THROWS_AS(load_annotation(dir / "bad.png"), FormatError);

    ProbabilityMap map(2, 1, std::vector<double>{0.0, 0.5});
    save_probability(map, dir / "p.png");
    const Grid<std::uint8_t> gray = load_index_image(dir / "p.png");
    CHECK(gray(0, 0) == 0);
    CHECK(gray(1, 0) == 128);
}
