#include <cmath>
#include <sstream>

#include "crowncount/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crowncount;

namespace {

PlantationSpec small_spec(std::uint64_t seed = 3) {
    PlantationSpec spec;
    spec.rows = 6;
    spec.cols = 7;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK_NOTHROW(PlantationSpec{}.validate());
    PlantationSpec spec;
    spec.spacing = 36.0;  // crowns of radius 18 would touch
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    spec = PlantationSpec{};
    spec.rows = 0;
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    spec = PlantationSpec{};
    spec.failure_prob = 1.5;
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    spec = PlantationSpec{};
    spec.crown_radius_min = 20;
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    CHECK_THROWS_AS(generate(spec), PreconditionError);
}

TEST_CASE("a full 20x20 grid plants 400 trees") {
    PlantationSpec spec;
    spec.failure_prob = 0.0;
    spec.seed = 5;
    const SyntheticScene scene = generate(spec);
    CHECK(scene.truth.count() == 400);
    CHECK(scene.crowns.size() == 400);
    CHECK(scene.image.width() == 800);
    CHECK(scene.image.height() == 800);
    CHECK(scene.annotation.width() == 800);
}

TEST_CASE("failure probability 1 leaves bare soil") {
    PlantationSpec spec = small_spec();
    spec.failure_prob = 1.0;
    spec.clutter_count = 0;
    spec.noise_sigma = 0.0;
    const SyntheticScene scene = generate(spec);
    CHECK(scene.truth.count() == 0);
    // soil is redder than it is green everywhere, crowns are the reverse
    for (const Rgb& p : scene.image.values()) {
        CHECK(p.r > p.g);
    }
    bool has_soil_marks = false;
    for (const Mark m : scene.annotation.values()) {
        CHECK(m != Mark::tree);
        has_soil_marks = has_soil_marks || m == Mark::non_tree;
    }
    CHECK(has_soil_marks);
}

TEST_CASE("generation is deterministic per seed") {
    const SyntheticScene a = generate(small_spec(11));
    const SyntheticScene b = generate(small_spec(11));
    CHECK(a.image == b.image);
    CHECK(a.annotation == b.annotation);
    REQUIRE(a.truth.count() == b.truth.count());
    for (std::size_t i = 0; i < a.truth.count(); ++i) {
        CHECK(a.truth.centers[i].x == b.truth.centers[i].x);
        CHECK(a.truth.centers[i].y == b.truth.centers[i].y);
    }
    const SyntheticScene c = generate(small_spec(12));
    CHECK_FALSE(a.image == c.image);
}

TEST_CASE("every truth center lies inside its crown and crowns are green") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        PlantationSpec spec = small_spec(seed);
        spec.jitter = 4.0;
        const SyntheticScene scene = generate(spec);
        REQUIRE(scene.crowns.size() == scene.truth.count());
        for (std::size_t i = 0; i < scene.truth.count(); ++i) {
            const auto& c = scene.truth.centers[i];
            CHECK(scene.crowns[i].contains(c.x, c.y));
            CHECK(scene.crowns[i].semi_major <= spec.crown_radius_max);
            CHECK(scene.crowns[i].semi_minor > 0.0);
        }
    }
}

TEST_CASE("without jitter or failures centers sit exactly on the grid") {
    PlantationSpec spec = small_spec();
    spec.jitter = 0.0;
    spec.failure_prob = 0.0;
    const SyntheticScene scene = generate(spec);
    REQUIRE(scene.truth.count() == 42);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const auto& p = scene.truth.centers[static_cast<std::size_t>(r * spec.cols + c)];
            CHECK(p.x == (c + 0.5) * spec.spacing);
            CHECK(p.y == (r + 0.5) * spec.spacing);
            if (c + 1 < spec.cols) {
                const auto& q = scene.truth.centers[static_cast<std::size_t>(r * spec.cols + c + 1)];
                CHECK(std::hypot(q.x - p.x, q.y - p.y) == spec.spacing);
            }
            if (r + 1 < spec.rows) {
                const auto& q = scene.truth.centers[static_cast<std::size_t>((r + 1) * spec.cols + c)];
                CHECK(std::hypot(q.x - p.x, q.y - p.y) == spec.spacing);
            }
        }
    }
}

TEST_CASE("annotation marks a fifth of the crowns and soil away from crowns") {
    PlantationSpec spec = small_spec(8);
    spec.failure_prob = 0.0;
    const SyntheticScene scene = generate(spec);
    std::size_t annotated_crowns = 0;
    for (const Crown& crown : scene.crowns) {
        const int x = static_cast<int>(crown.cx);
        const int y = static_cast<int>(crown.cy);
        annotated_crowns += scene.annotation(x, y) == Mark::tree;
    }
    CHECK(annotated_crowns == static_cast<std::size_t>(std::ceil(kAnnotatedTreeFraction * 42)));

    for (int y = 0; y < scene.annotation.height(); ++y) {
        for (int x = 0; x < scene.annotation.width(); ++x) {
            const Mark m = scene.annotation(x, y);
            if (m == Mark::unlabeled) continue;
            bool inside = false;
            for (const Crown& crown : scene.crowns) {
                inside = inside || crown.contains(x, y);
            }
            CHECK(inside == (m == Mark::tree));
        }
    }
}

TEST_CASE("truth CSV round trip") {
    testing::TempDir dir;
    const SyntheticScene scene = generate(small_spec(4));
    save_truth_csv(dir / "t.csv", scene.truth);
    const GroundTruth back = load_truth_csv(dir / "t.csv");
    REQUIRE(back.count() == scene.truth.count());
    for (std::size_t i = 0; i < back.count(); ++i) {
        CHECK(back.centers[i].x == doctest::Approx(scene.truth.centers[i].x).epsilon(1e-3));
        CHECK(back.centers[i].y == doctest::Approx(scene.truth.centers[i].y).epsilon(1e-3));
    }

    std::ostringstream out;
    write_truth_csv(out, GroundTruth{{{1.5, 2.25}}});
    CHECK(out.str() == "x,y\n1.500,2.250\n");

    std::istringstream headerless("3,4\n5.5,6\n");
    CHECK(read_truth_csv(headerless).count() == 2);
    std::istringstream bad("x,y\n1,banana\n");
    CHECK_THROWS_AS(read_truth_csv(bad), FormatError);
    CHECK_THROWS_AS(load_truth_csv(dir / "none.csv"), IoError);
}
