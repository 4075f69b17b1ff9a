#include "carpetlab/image_io.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <png.h>

#include "carpetlab/errors.hpp"

namespace carpetlab {

namespace {

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png) throw std::runtime_error("png_create_write_struct failed");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            throw std::runtime_error("png_create_info_struct failed");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;
};

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

Bytes encode_png_rows(int width, int height, int color_type, int channels, const std::uint8_t* pixels) {
    Bytes out;
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw std::runtime_error("PNG encoding failed");
    png_set_write_fn(w.png, &out, append_bytes, no_flush);
    png_set_compression_level(w.png, 6);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    for (int y = 0; y < height; ++y) {
        png_write_row(w.png, const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * stride));
    }
    png_write_end(w.png, nullptr);
    return out;
}

struct MemoryReader {
    const Bytes* data;
    std::size_t offset;
};

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
    auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (r->offset + length > r->data->size()) png_error(png, "truncated PNG");
    std::memcpy(out, r->data->data() + r->offset, length);
    r->offset += length;
}

Raster decode_png(const Bytes& data) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> pixels;
    png_uint_32 width = 0, height = 0;
    MemoryReader reader{&data, 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("malformed PNG");
    }
    png_set_read_fn(png, &reader, read_bytes);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    png_set_strip_16(png);
    png_set_expand(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    for (png_uint_32 y = 0; y < height; ++y) png_read_row(png, pixels.data() + y * stride, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Raster raster(static_cast<int>(width), static_cast<int>(height),
                  Viewport{0.0, 1.0, 0.0, static_cast<double>(height) / width});
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) raster.set(static_cast<int>(x), static_cast<int>(y), pixels[y * stride + x] >= 128);
    }
    return raster;
}

Raster decode_pgm(const Bytes& data) {
    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(data[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long v = 0;
        bool any = false;
        while (pos < data.size() && std::isdigit(data[pos])) {
            v = v * 10 + (data[pos++] - '0');
            any = true;
            if (v > 1'000'000'000) throw DataError("PGM header value out of range");
        }
        if (!any) throw DataError("malformed PGM header");
        return v;
    };
    const bool binary = data[1] == '5';
    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw DataError("unsupported PGM dimensions");
    Raster raster(static_cast<int>(width), static_cast<int>(height), Viewport{0.0, 1.0, 0.0, static_cast<double>(height) / width});
    const long threshold = (maxval + 1) / 2;
    if (binary) {
        ++pos;  // single whitespace after maxval
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        if (data.size() < pos + static_cast<std::size_t>(width * height) * bpp) throw DataError("truncated PGM");
        for (long y = 0; y < height; ++y) {
            for (long x = 0; x < width; ++x) {
                const std::size_t i = pos + static_cast<std::size_t>(y * width + x) * bpp;
                const long v = bpp == 1 ? data[i] : (data[i] << 8 | data[i + 1]);
                raster.set(static_cast<int>(x), static_cast<int>(y), v >= threshold);
            }
        }
    } else {
        for (long y = 0; y < height; ++y) {
            for (long x = 0; x < width; ++x) raster.set(static_cast<int>(x), static_cast<int>(y), next_token() >= threshold);
        }
    }
    return raster;
}

}  // namespace

Bytes encode_pgm(const Raster& raster) {
    const std::string header = fmt::format("P5\n{} {}\n255\n", raster.width(), raster.height());
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + raster.bits().size());
    for (std::uint8_t b : raster.bits()) out.push_back(b ? 255 : 0);
    return out;
}

Bytes encode_png(const Raster& raster) {
    std::vector<std::uint8_t> gray(raster.bits().size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = raster.bits()[i] ? 255 : 0;
    return encode_png_rows(raster.width(), raster.height(), PNG_COLOR_TYPE_GRAY, 1, gray.data());
}

Bytes encode_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw InvalidParameter("RGB buffer size does not match dimensions");
    }
    return encode_png_rows(width, height, PNG_COLOR_TYPE_RGB, 3, rgb.data());
}

Bytes encode_gray(int width, int height, const std::vector<std::uint8_t>& gray, const std::string& format) {
    if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InvalidParameter("gray buffer size does not match dimensions");
    }
    if (format == "png") return encode_png_rows(width, height, PNG_COLOR_TYPE_GRAY, 1, gray.data());
    if (format == "pgm") {
        const std::string header = fmt::format("P5\n{} {}\n255\n", width, height);
        Bytes out(header.begin(), header.end());
        out.insert(out.end(), gray.begin(), gray.end());
        return out;
    }
    throw InvalidParameter("unknown image format: " + format);
}

Raster decode_raster(const Bytes& data) {
    static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= 8 && std::memcmp(data.data(), kPngMagic, 8) == 0) return decode_png(data);
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '2')) return decode_pgm(data);
    throw DataError("unrecognized image format (expected PGM or PNG)");
}

Raster read_raster(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read input: " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_raster(data);
    } catch (const DataError& e) {
        throw DataError(fmt::format("cannot read input: {}: {}", path.string(), e.what()));
    }
}

void write_bytes(const std::filesystem::path& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write output: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("cannot write output: " + path.string());
}

Bytes encode_raster(const Raster& raster, const std::string& format) {
    if (format == "png") return encode_png(raster);
    if (format == "pgm") return encode_pgm(raster);
    throw InvalidParameter("unknown image format: " + format);
}

}  // namespace carpetlab
