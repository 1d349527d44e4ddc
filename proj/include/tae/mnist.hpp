#pragma once

#include "tae/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tae {

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

class IdxError : public std::runtime_error {
public:
    enum class Kind { unreadable, wrong_magic, size_mismatch, truncated, label_out_of_range };

    IdxError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    { }

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Images N x 1 x H x W in [0, 1] with one class id per image.
struct IdxDataset {
    Tensor images;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

/// Big-endian header (magic 2051, N, H, W as u32) followed by N*H*W bytes; pixels scaled by 1/255.
Tensor parse_idx_images(std::span<const std::uint8_t> bytes);
/// Big-endian header (magic 2049, N as u32) followed by N label bytes in [0, 9].
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Inverse of parse_idx_images; pixels are rounded back to bytes.
std::vector<std::uint8_t> serialize_idx_images(const Tensor& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const int> labels);

/// Reads a whole file, transparently inflating gzip (detected by the 0x1f 0x8b prefix).
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

IdxDataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Rows [first, first + count) of a dataset.
IdxDataset slice(const IdxDataset& data, std::size_t first, std::size_t count);

/// Index lists for one epoch: a Fisher-Yates shuffle seeded from (seed, epoch),
/// cut into floor(N / S) batches of exactly S; the remainder is dropped.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                                    std::uint64_t epoch);

struct Batch {
    Tensor images;
    std::vector<int> labels;
};

Batch gather(const IdxDataset& data, std::span<const std::size_t> rows);

}  // namespace tae
