#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "crowncount/imaging.hpp"
#include "crowncount/particles.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crowncount;

namespace {

// Writes raw samples with an arbitrary libpng color type and bit depth.
void write_raw_png(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
                   const std::vector<std::uint8_t>& bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, bytes.data() + stride * static_cast<std::size_t>(y));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

RasterImage random_image(std::mt19937_64& rng, int w, int h) {
    RasterImage image(w, h);
    std::uniform_int_distribution<int> v(0, 255);
    for (auto& p : image.values()) {
        p = Rgb{static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng))};
    }
    return image;
}

}  // namespace

TEST_CASE("grid rejects empty dimensions and mismatched data") {
    CHECK_THROWS_AS(RasterImage(0, 3), PreconditionError);
    CHECK_THROWS_AS(GrayPlane(2, 2, std::vector<double>(3)), PreconditionError);
    GrayPlane g(3, 2, 1.5);
    CHECK(g.size() == 6);
    CHECK(g.clamped(-4, 9) == 1.5);
    CHECK(g.index(2, 1) == 5);
}

TEST_CASE("label_count is the largest label") {
    LabelMap labels(3, 1, std::vector<std::int32_t>{0, 2, 1});
    CHECK(label_count(labels) == 2);
    CHECK(label_count(LabelMap(2, 2)) == 0);
}

TEST_CASE("load_image decodes a red/blue pair") {
    testing::TempDir dir;
    RasterImage image(2, 1);
    image(0, 0) = Rgb{255, 0, 0};
    image(1, 0) = Rgb{0, 0, 255};
    save_image(image, dir / "pair.png");
    const RasterImage back = load_image(dir / "pair.png");
    CHECK(back(0, 0) == Rgb{255, 0, 0});
    CHECK(back(1, 0) == Rgb{0, 0, 255});
}

TEST_CASE("gray PNG value 128 replicates to all channels") {
    testing::TempDir dir;
    write_raw_png(dir / "gray.png", 2, 2, PNG_COLOR_TYPE_GRAY, 8, {128, 128, 128, 128});
    const RasterImage image = load_image(dir / "gray.png");
    for (const Rgb& p : image.values()) {
        CHECK(p == Rgb{128, 128, 128});
    }
}

TEST_CASE("16-bit samples scale to 8 bits and alpha is dropped") {
    testing::TempDir dir;
    // one RGBA16 pixel: r=0xffff g=0x8080 b=0x0000 a=0x1234
    write_raw_png(dir / "deep.png", 1, 1, PNG_COLOR_TYPE_RGB_ALPHA, 16, {0xff, 0xff, 0x80, 0x80, 0, 0, 0x12, 0x34});
    const RasterImage image = load_image(dir / "deep.png");
    CHECK(image(0, 0) == Rgb{255, 128, 0});

    write_raw_png(dir / "ga.png", 2, 1, PNG_COLOR_TYPE_GRAY_ALPHA, 8, {10, 0, 200, 255});
    const RasterImage ga = load_image(dir / "ga.png");
    CHECK(ga(0, 0) == Rgb{10, 10, 10});
    CHECK(ga(1, 0) == Rgb{200, 200, 200});
}

TEST_CASE("RGB round trip is pixel exact") {
    testing::TempDir dir;
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const RasterImage image = random_image(rng, 7 + trial, 5 + 2 * trial);
        save_image(image, dir / "rt.png");
        CHECK(load_image(dir / "rt.png") == image);
    }
}

TEST_CASE("indexed and gray8 images keep their sample values") {
    testing::TempDir dir;
    Grid<std::uint8_t> indices(3, 2, std::vector<std::uint8_t>{0, 1, 2, 2, 1, 0});
    const std::vector<Rgb> palette{{0, 0, 0}, {0, 200, 0}, {200, 0, 200}};
    save_indexed(indices, palette, dir / "idx.png");
    CHECK(load_index_image(dir / "idx.png") == indices);
    CHECK(load_image(dir / "idx.png")(1, 0) == Rgb{0, 200, 0});

    Grid<std::uint8_t> gray(2, 2, std::vector<std::uint8_t>{0, 17, 128, 255});
    save_gray8(gray, dir / "g8.png");
    CHECK(load_index_image(dir / "g8.png") == gray);
}

TEST_CASE("load errors distinguish missing, foreign and truncated files") {
    testing::TempDir dir;
    CHECK_THROWS_AS(load_image(dir / "absent.png"), IoError);

    std::ofstream(dir / "text.png") << "definitely not a png";
    CHECK_THROWS_AS(load_image(dir / "text.png"), FormatError);

    std::mt19937_64 rng(5);
    save_image(random_image(rng, 40, 40), dir / "full.png");
    std::ifstream in(dir / "full.png", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream(dir / "cut.png", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_image(dir / "cut.png"), FormatError);

    write_raw_png(dir / "rgb.png", 1, 1, PNG_COLOR_TYPE_RGB, 8, {1, 2, 3});
    CHECK_THROWS_AS(load_index_image(dir / "rgb.png"), FormatError);
}

TEST_CASE("saving to an unwritable path is an IoError") {
    CHECK_THROWS_AS(save_image(RasterImage(1, 1), "/nonexistent-dir/x/y.png"), IoError);
}

TEST_CASE("overlay with no detections is identical to the input") {
    std::mt19937_64 rng(9);
    const RasterImage image = random_image(rng, 30, 20);
    CHECK(render_overlay(image, {}) == image);
}

TEST_CASE("overlay drawing stays within the ellipse bounding box plus 2 px") {
    for (const double angle : {0.0, 30.0, 90.0, 135.0}) {
        RasterImage image(120, 100, Rgb{10, 20, 30});
        Detection d;
        d.id = 7;
        d.centroid_x = 60.3;
        d.centroid_y = 49.6;
        d.major = 60.0;
        d.minor = 30.0;
        d.angle = angle;
        const RasterImage out = render_overlay(image, std::vector<Detection>{d});

        // Oracle box from a dense sampling of the ellipse boundary.
        const double t = angle * M_PI / 180.0;
        double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
        for (int k = 0; k < 3600; ++k) {
            const double phi = 2.0 * M_PI * k / 3600.0;
            const double ex = 30.0 * std::cos(phi);
            const double ey = 15.0 * std::sin(phi);
            const double x = d.centroid_x + ex * std::cos(t) - ey * std::sin(t);
            const double y = d.centroid_y + ex * std::sin(t) + ey * std::cos(t);
            lo_x = std::min(lo_x, x);
            hi_x = std::max(hi_x, x);
            lo_y = std::min(lo_y, y);
            hi_y = std::max(hi_y, y);
        }
        const auto [hx, hy] = ellipse_half_extents(d.major, d.minor, d.angle);
        CHECK(hx == doctest::Approx((hi_x - lo_x) / 2).epsilon(1e-3));
        CHECK(hy == doctest::Approx((hi_y - lo_y) / 2).epsilon(1e-3));

        int changed = 0;
        bool outline = false;
        bool digits = false;
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                if (out(x, y) == image(x, y)) {
                    continue;
                }
                ++changed;
                CHECK(x >= std::floor(lo_x) - 2);
                CHECK(x <= std::ceil(hi_x) + 2);
                CHECK(y >= std::floor(lo_y) - 2);
                CHECK(y <= std::ceil(hi_y) + 2);
                outline = outline || out(x, y) == kOutlineColor;
                digits = digits || out(x, y) == kLabelColor;
            }
        }
        CHECK(changed > 50);
        CHECK(outline);
        CHECK(digits);
    }
}

TEST_CASE("overlay rejects detections outside the image") {
    Detection d;
    d.id = 1;
    d.centroid_x = 40.0;
    d.centroid_y = 5.0;
    d.major = d.minor = 4.0;
    CHECK_THROWS_AS(render_overlay(RasterImage(20, 20), std::vector<Detection>{d}), PreconditionError);
}

TEST_CASE("label colors are deterministic and background is black") {
    CHECK(label_color(0) == Rgb{0, 0, 0});
    CHECK(label_color(5) == label_color(5));
    CHECK_FALSE(label_color(5) == label_color(6));
    LabelMap labels(2, 1, std::vector<std::int32_t>{0, 3});
    const RasterImage colors = colorize_labels(labels);
    CHECK(colors(1, 0) == label_color(3));
}
