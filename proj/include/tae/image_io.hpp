#pragma once

#include "tae/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tae {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  ///< row-major, 0 = black
};

enum class ImageFormat { pgm, png };

ImageFormat parse_image_format(const std::string& name);

/// [0, 1] -> byte, rounding half up and clamping.
std::uint8_t quantize_pixel(double v);

/// One row per frame sequence (each T x 1 x h x w), frames left to right,
/// separated by 1-pixel white lines.
GrayImage render_grid(std::span<const Tensor> rows);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);

/// Throws std::runtime_error if the file cannot be written.
void write_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tae
