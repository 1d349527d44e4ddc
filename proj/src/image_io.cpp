#include "tae/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tae {

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void png_chunk(std::vector<std::uint8_t>& out, const char type[4], const std::vector<std::uint8_t>& data)
{
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

void write_bytes(const std::filesystem::path& path, const void* data, std::size_t size)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

ImageFormat parse_image_format(const std::string& name)
{
    if (name == "pgm") return ImageFormat::pgm;
    if (name == "png") return ImageFormat::png;
    throw std::invalid_argument("unknown image format '" + name + "', expected pgm or png");
}

std::uint8_t quantize_pixel(double v)
{
    const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<std::uint8_t>(scaled);
}

GrayImage render_grid(std::span<const Tensor> rows)
{
    if (rows.empty()) throw std::invalid_argument("render_grid needs at least one row");
    const Shape& first = rows.front().shape();
    if (first.size() != 4 || first[1] != 1) throw ShapeError("grid rows must be T x 1 x h x w, got " + shape_string(first));
    const std::size_t T = first[0], h = first[2], w = first[3];
    for (const auto& r : rows)
        if (r.shape() != first) throw ShapeError("grid rows must share one shape");

    GrayImage img;
    img.width = T * w + (T - 1);
    img.height = rows.size() * h + (rows.size() - 1);
    img.pixels.assign(img.width * img.height, 255);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t f = 0; f < T; ++f)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const std::size_t gy = r * (h + 1) + y, gx = f * (w + 1) + x;
                    img.pixels[gy * img.width + gx] = quantize_pixel(rows[r][(f * h + y) * w + x]);
                }
    return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image)
{
    const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    return out;
}

std::vector<std::uint8_t> encode_png(const GrayImage& image)
{
    static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> out(signature, signature + 8);

    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(image.width));
    put_be32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // 8-bit greyscale, deflate, adaptive filter, no interlace
    png_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(image.height * (image.width + 1));
    for (std::size_t y = 0; y < image.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), image.pixels.begin() + static_cast<std::ptrdiff_t>(y * image.width),
                   image.pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * image.width));
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> packed(packed_size);
    if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    packed.resize(packed_size);
    png_chunk(out, "IDAT", packed);
    png_chunk(out, "IEND", {});
    return out;
}

void write_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format)
{
    const auto bytes = format == ImageFormat::pgm ? encode_pgm(image) : encode_png(image);
    write_bytes(path, bytes.data(), bytes.size());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    write_bytes(path, text.data(), text.size());
}

}  // namespace tae
