#include "dforge/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace dforge {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Stores the libpng message and longjmps back; exceptions must not cross the
// C frames of libpng.
void store_error_fn(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    std::longjmp(png_jmpbuf(png), 1);
}

void ignore_warning_fn(png_structp, png_const_charp) {}

struct ReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~ReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct WriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~WriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

}  // namespace

ImageU8 load_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DataError("png: not found: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw DataError("png: not a PNG stream: " + path);

    std::string libpng_msg;
    ReadGuard g;
    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &libpng_msg,
                                   store_error_fn, ignore_warning_fn);
    if (!g.png) throw DataError("png: failed to allocate read struct");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw DataError("png: failed to allocate info struct");

    ImageU8 img;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(g.png)))
        throw DataError("png: corrupt stream (" + libpng_msg + "): " + path);

    png_init_io(g.png, file.get());
    png_set_sig_bytes(g.png, 8);
    png_read_info(g.png, g.info);

    const int bit_depth = png_get_bit_depth(g.png, g.info);
    const int color_type = png_get_color_type(g.png, g.info);
    if (bit_depth != 8)
        throw DataError("png: unsupported bit depth " + std::to_string(bit_depth) +
                        " (only 8-bit supported): " + path);
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
        const bool has_alpha = color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
                               color_type == PNG_COLOR_TYPE_GRAY_ALPHA;
        throw DataError(std::string("png: ") +
                        (has_alpha ? "alpha channel rejected" : "unsupported color type") +
                        ": " + path);
    }

    const int passes = png_set_interlace_handling(g.png);
    (void)passes;
    png_read_update_info(g.png, g.info);

    const int h = static_cast<int>(png_get_image_height(g.png, g.info));
    const int w = static_cast<int>(png_get_image_width(g.png, g.info));
    const int c = color_type == PNG_COLOR_TYPE_GRAY ? 1 : 3;

    img = ImageU8(h, w, c);
    rows.resize(h);
    const std::size_t row_bytes = static_cast<std::size_t>(w) * c;
    if (png_get_rowbytes(g.png, g.info) != row_bytes)
        throw DataError("png: unexpected row size: " + path);
    for (int r = 0; r < h; ++r) rows[r] = img.data.data() + r * row_bytes;

    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);
    return img;
}

void save_png(const std::string& path, const ImageU8& img) {
    if (img.channels != 1 && img.channels != 3)
        throw DataError("png: only 1- or 3-channel images can be written");
    if (img.height <= 0 || img.width <= 0)
        throw DataError("png: refusing to write empty image");

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw DataError("png: cannot open for writing: " + path);

    std::string libpng_msg;
    WriteGuard g;
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &libpng_msg,
                                    store_error_fn, ignore_warning_fn);
    if (!g.png) throw DataError("png: failed to allocate write struct");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw DataError("png: failed to allocate info struct");

    std::vector<png_bytep> rows(img.height);
    const std::size_t row_bytes = static_cast<std::size_t>(img.width) * img.channels;
    for (int r = 0; r < img.height; ++r)
        rows[r] = const_cast<png_bytep>(img.data.data() + r * row_bytes);

    if (setjmp(png_jmpbuf(g.png)))
        throw DataError("png: write failed (" + libpng_msg + "): " + path);

    png_init_io(g.png, file.get());
    const int color_type = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(g.png, g.info, img.width, img.height, 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(g.png, g.info);
    png_write_image(g.png, rows.data());
    png_write_end(g.png, g.info);
}

}  // namespace dforge
