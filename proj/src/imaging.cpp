#include "crowncount/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>

#include "crowncount/particles.hpp"

namespace crowncount {

std::int32_t label_count(const LabelMap& labels) {
    std::int32_t k = 0;
    for (const auto v : labels.values()) {
        k = std::max(k, v);
    }
    return k;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return f;
}

// libpng reports errors via longjmp; keep the message so we can rethrow it
// as a C++ exception once control is back outside the png calls.
struct PngErrorState {
    char message[256] = "corrupt or unsupported PNG";
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state != nullptr && msg != nullptr) {
        std::snprintf(state->message, sizeof(state->message), "%s", msg);
    }
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> bytes;
};

// Reads into 8-bit samples. With expand_to_rgb the result is always 3
// channels; otherwise palettes stay as indices and the result is 1 channel.
DecodedPng decode_png(const std::filesystem::path& path, bool expand_to_rgb) {
    FilePtr file = open_file(path, "rb");
    std::array<unsigned char, 8> signature{};
    if (std::fread(signature.data(), 1, signature.size(), file.get()) != signature.size() ||
        png_sig_cmp(signature.data(), 0, signature.size()) != 0) {
        throw FormatError(path.string() + ": not a PNG file");
    }

    PngErrorState error_state;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_state, png_error_handler, png_warning_handler);
    if (png == nullptr) {
        throw FormatError("png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("png_create_info_struct failed");
    }

    DecodedPng out;
    std::vector<png_bytep> rows;
    volatile bool failed = false;
    volatile bool unsupported = false;

    if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_init_io(png, file.get());
        png_set_sig_bytes(png, static_cast<int>(signature.size()));
        png_read_info(png, info);

        const png_uint_32 width = png_get_image_width(png, info);
        const png_uint_32 height = png_get_image_height(png, info);
        const int color_type = png_get_color_type(png, info);
        const int bit_depth = png_get_bit_depth(png, info);

        if (bit_depth == 16) {
            png_set_scale_16(png);
        }
        if (expand_to_rgb) {
            if (color_type == PNG_COLOR_TYPE_PALETTE) {
                png_set_palette_to_rgb(png);
            }
            if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
                png_set_expand_gray_1_2_4_to_8(png);
            }
            if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
                png_set_gray_to_rgb(png);
            }
            if ((color_type & PNG_COLOR_MASK_ALPHA) != 0) {
                png_set_strip_alpha(png);
            }
        } else {
            if (color_type == PNG_COLOR_TYPE_PALETTE || color_type == PNG_COLOR_TYPE_GRAY) {
                if (bit_depth < 8) {
                    png_set_packing(png);
                }
            } else {
                unsupported = true;
            }
        }

        if (!unsupported) {
            png_read_update_info(png, info);
            out.width = static_cast<int>(width);
            out.height = static_cast<int>(height);
            out.channels = png_get_channels(png, info);
            const std::size_t stride = png_get_rowbytes(png, info);
            out.bytes.resize(stride * height);
            rows.resize(height);
            for (png_uint_32 y = 0; y < height; ++y) {
                rows[y] = out.bytes.data() + y * stride;
            }
            png_read_image(png, rows.data());
            png_read_end(png, nullptr);
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (failed) {
        throw FormatError(path.string() + ": " + error_state.message);
    }
    if (unsupported) {
        throw FormatError(path.string() + ": expected a single-channel (indexed or gray) PNG");
    }
    if (out.width <= 0 || out.height <= 0) {
        throw FormatError(path.string() + ": empty image");
    }
    return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type,
                std::span<const std::uint8_t> bytes, int channels, std::span<const Rgb> palette = {}) {
    FilePtr file = open_file(path, "wb");
    PngErrorState error_state;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &error_state, png_error_handler, png_warning_handler);
    if (png == nullptr) {
        throw IoError("png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<png_color> png_palette;
    for (const Rgb& c : palette) {
        png_palette.push_back(png_color{c.r, c.g, c.b});
    }
    std::vector<png_const_bytep> rows(static_cast<std::size_t>(height));
    const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = bytes.data() + static_cast<std::size_t>(y) * stride;
    }

    volatile bool failed = false;
    if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_init_io(png, file.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        if (!png_palette.empty()) {
            png_set_PLTE(png, info, png_palette.data(), static_cast<int>(png_palette.size()));
        }
        png_write_info(png, info);
        png_write_image(png, const_cast<png_bytepp>(rows.data()));
        png_write_end(png, nullptr);
    }
    png_destroy_write_struct(&png, &info);
    if (failed) {
        throw IoError(path.string() + ": " + error_state.message);
    }
    if (std::fflush(file.get()) != 0) {
        throw IoError("cannot write " + path.string());
    }
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("missing file " + path.string());
    }
    const DecodedPng png = decode_png(path, true);
    std::vector<Rgb> pixels(static_cast<std::size_t>(png.width) * static_cast<std::size_t>(png.height));
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = Rgb{png.bytes[3 * i], png.bytes[3 * i + 1], png.bytes[3 * i + 2]};
    }
    return RasterImage(png.width, png.height, std::move(pixels));
}

Grid<std::uint8_t> load_index_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("missing file " + path.string());
    }
    DecodedPng png = decode_png(path, false);
    return Grid<std::uint8_t>(png.width, png.height, std::move(png.bytes));
}

void save_image(const RasterImage& image, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(image.size() * 3);
    for (const Rgb& p : image.values()) {
        bytes.push_back(p.r);
        bytes.push_back(p.g);
        bytes.push_back(p.b);
    }
    encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, bytes, 3);
}

void save_gray8(const Grid<std::uint8_t>& gray, const std::filesystem::path& path) {
    encode_png(path, gray.width(), gray.height(), PNG_COLOR_TYPE_GRAY, gray.values(), 1);
}

void save_indexed(const Grid<std::uint8_t>& indices, std::span<const Rgb> palette,
                  const std::filesystem::path& path) {
    require(!palette.empty() && palette.size() <= 256, "palette must have 1..256 entries");
    for (const auto v : indices.values()) {
        require(v < palette.size(), "palette index out of range");
    }
    encode_png(path, indices.width(), indices.height(), PNG_COLOR_TYPE_PALETTE, indices.values(), 1, palette);
}

// Overlay ------------------------------------------------------------------

namespace {

// 3x5 bitmap digits, one row per byte (bit 2 = leftmost column).
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigitGlyphs{{
    {0b111, 0b101, 0b101, 0b101, 0b111},
    {0b010, 0b110, 0b010, 0b010, 0b111},
    {0b111, 0b001, 0b111, 0b100, 0b111},
    {0b111, 0b001, 0b111, 0b001, 0b111},
    {0b101, 0b101, 0b111, 0b001, 0b001},
    {0b111, 0b100, 0b111, 0b001, 0b111},
    {0b111, 0b100, 0b111, 0b101, 0b111},
    {0b111, 0b001, 0b010, 0b010, 0b010},
    {0b111, 0b101, 0b111, 0b101, 0b111},
    {0b111, 0b101, 0b111, 0b001, 0b111},
}};

struct ClipBox {
    int x0, y0, x1, y1;  // inclusive

    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

void plot(RasterImage& image, const ClipBox& box, int x, int y, Rgb color) {
    if (image.contains(x, y) && box.contains(x, y)) {
        image(x, y) = color;
    }
}

void draw_ellipse_outline(RasterImage& image, const Detection& d, const ClipBox& box) {
    const double a = d.major / 2.0;
    const double b = d.minor / 2.0;
    const double theta = d.angle * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const int steps = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * a * 2.0)));
    for (int i = 0; i < steps; ++i) {
        const double t = 2.0 * std::numbers::pi * i / steps;
        const double ex = a * std::cos(t);
        const double ey = b * std::sin(t);
        const int x = static_cast<int>(std::lround(d.centroid_x + ex * c - ey * s));
        const int y = static_cast<int>(std::lround(d.centroid_y + ex * s + ey * c));
        plot(image, box, x, y, kOutlineColor);
    }
}

void draw_number(RasterImage& image, const ClipBox& box, int value, double cx, double cy) {
    const std::string text = std::to_string(value);
    const int glyph_w = 3;
    const int glyph_h = 5;
    const int total_w = static_cast<int>(text.size()) * (glyph_w + 1) - 1;
    const int left = static_cast<int>(std::lround(cx)) - total_w / 2;
    const int top = static_cast<int>(std::lround(cy)) - glyph_h / 2;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const auto& glyph = kDigitGlyphs[static_cast<std::size_t>(text[k] - '0')];
        const int gx = left + static_cast<int>(k) * (glyph_w + 1);
        for (int row = 0; row < glyph_h; ++row) {
            for (int col = 0; col < glyph_w; ++col) {
                if ((glyph[static_cast<std::size_t>(row)] >> (glyph_w - 1 - col)) & 1U) {
                    plot(image, box, gx + col, top + row, kLabelColor);
                }
            }
        }
    }
}

}  // namespace

std::pair<double, double> ellipse_half_extents(double major, double minor, double angle_deg) {
    const double a = major / 2.0;
    const double b = minor / 2.0;
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {std::sqrt(a * a * c * c + b * b * s * s), std::sqrt(a * a * s * s + b * b * c * c)};
}

RasterImage render_overlay(const RasterImage& image, std::span<const Detection> detections) {
    for (const Detection& d : detections) {
        require(d.centroid_x >= 0.0 && d.centroid_y >= 0.0 && d.centroid_x <= image.width() - 1 &&
                    d.centroid_y <= image.height() - 1,
                "detection " + std::to_string(d.id) + " lies outside the image");
    }
    RasterImage out = image;
    for (const Detection& d : detections) {
        const auto [hx, hy] = ellipse_half_extents(d.major, d.minor, d.angle);
        const ClipBox box{static_cast<int>(std::floor(d.centroid_x - hx)) - 2,
                          static_cast<int>(std::floor(d.centroid_y - hy)) - 2,
                          static_cast<int>(std::ceil(d.centroid_x + hx)) + 2,
                          static_cast<int>(std::ceil(d.centroid_y + hy)) + 2};
        draw_ellipse_outline(out, d, box);
        draw_number(out, box, d.id, d.centroid_x, d.centroid_y);
    }
    return out;
}

void save_overlay(const RasterImage& image, std::span<const Detection> detections,
                  const std::filesystem::path& path) {
    save_image(render_overlay(image, detections), path);
}

Rgb label_color(std::int32_t label) {
    if (label <= 0) {
        return Rgb{0, 0, 0};
    }
    const std::uint64_t h = static_cast<std::uint64_t>(label) * 0x9e3779b97f4a7c15ULL;
    // keep colors away from black so labels stay visible
    return Rgb{static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf)), static_cast<std::uint8_t>(64 + ((h >> 32) & 0xbf)),
               static_cast<std::uint8_t>(64 + ((h >> 48) & 0xbf))};
}

RasterImage colorize_labels(const LabelMap& labels) {
    RasterImage out(labels.width(), labels.height());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = label_color(labels[i]);
    }
    return out;
}

}  // namespace crowncount
