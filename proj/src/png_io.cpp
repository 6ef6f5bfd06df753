#include "nss/dataio.hpp"
#include "nss/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace nss {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DataError("cannot open " + path.string());
    return f;
}

void png_error_fn(png_structp png, png_const_charp msg) {
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    if (text) *text = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Writes rows of `bit_depth` samples; `rows` holds big-endian-ready bytes when
// bit_depth is 16 (png_set_swap handles host order).
void write_png(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
               const std::vector<png_bytep>& rows) {
    FilePtr file = open_file(path, "wb");
    std::string error;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
    if (!png) throw DataError("libpng: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("cannot write " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct RawPng {
    int width = 0;
    int height = 0;
    int color_type = 0;
    int bit_depth = 0;
    int channels = 0;
    std::vector<unsigned char> bytes;  // host-order samples, row-major
};

RawPng read_png(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DataError(path.string() + ": not a PNG file");
    std::string error;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
    if (!png) throw DataError("libpng: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    RawPng out;
    std::vector<png_bytep> rows;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("cannot read " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.color_type = png_get_color_type(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (out.bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.bytes.resize(stride * out.height);
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

unsigned char to_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

}  // namespace

ColorImage quantize_color(const ColorImage& image) {
    ColorImage out = image;
    for (auto& px : out.pixels())
        for (int c = 0; c < 3; ++c) px[c] = to_byte(px[c]) / 255.0;
    return out;
}

void write_color_png(const ColorImage& image, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes(image.size() * 3);
    for (std::size_t i = 0; i < image.size(); ++i)
        for (int c = 0; c < 3; ++c) bytes[3 * i + c] = to_byte(image[i][c]);
    std::vector<png_bytep> rows(image.height());
    for (int y = 0; y < image.height(); ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * image.width() * 3;
    write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, rows);
}

ColorImage read_color_png(const std::filesystem::path& path) {
    RawPng raw = read_png(path);
    if (raw.bit_depth != 8) throw DataError(path.string() + ": expected an 8-bit color PNG");
    ColorImage image(raw.width, raw.height);
    const std::size_t stride = static_cast<std::size_t>(raw.width) * raw.channels;
    for (int y = 0; y < raw.height; ++y) {
        for (int x = 0; x < raw.width; ++x) {
            const unsigned char* p = raw.bytes.data() + y * stride + static_cast<std::size_t>(x) * raw.channels;
            if (raw.channels >= 3)
                image(x, y) = Rgb(p[0], p[1], p[2]) / 255.0;
            else
                image(x, y) = Rgb::Constant(p[0] / 255.0);
        }
    }
    return image;
}

void write_depth_png(const Image<std::uint16_t>& image, const std::filesystem::path& path) {
    std::vector<std::uint16_t> copy(image.pixels().begin(), image.pixels().end());
    std::vector<png_bytep> rows(image.height());
    for (int y = 0; y < image.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(y) * image.width());
    write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 16, rows);
}

Image<std::uint16_t> read_depth_png(const std::filesystem::path& path) {
    RawPng raw = read_png(path);
    if (raw.bit_depth != 16 || raw.channels != 1)
        throw DataError(path.string() + ": expected a 16-bit grayscale PNG");
    Image<std::uint16_t> image(raw.width, raw.height);
    const auto* samples = reinterpret_cast<const std::uint16_t*>(raw.bytes.data());
    const std::size_t stride = raw.bytes.size() / 2 / raw.height;
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) image(x, y) = samples[y * stride + x];
    return image;
}

void write_depth_png(const DepthImage& depth, double scale, const std::filesystem::path& path) {
    Image<std::uint16_t> q(depth.width(), depth.height());
    for (std::size_t i = 0; i < depth.size(); ++i) q[i] = quantize_depth(depth[i], scale);
    write_depth_png(q, path);
}

DepthImage read_depth_png(const std::filesystem::path& path, double scale) {
    const Image<std::uint16_t> q = read_depth_png(path);
    DepthImage depth(q.width(), q.height());
    for (std::size_t i = 0; i < q.size(); ++i) depth[i] = dequantize_depth(q[i], scale);
    return depth;
}

}  // namespace nss
