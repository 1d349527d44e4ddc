#include "tae/mnist.hpp"

#include "tae/rng.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

namespace tae {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at)
{
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v)
{
    static const char digits[] = "0123456789abcdef";
    std::string s = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xf];
    return s;
}

void check_body(std::size_t have, std::size_t header, std::uint64_t declared, const char* what)
{
    const std::uint64_t body = have - header;
    if (body < declared)
        throw IdxError(IdxError::Kind::truncated, std::string(what) + ": truncated body, header declares " +
                                                      std::to_string(declared) + " bytes but only " +
                                                      std::to_string(body) + " present");
    if (body > declared)
        throw IdxError(IdxError::Kind::size_mismatch, std::string(what) + ": header declares " +
                                                          std::to_string(declared) + " body bytes but file has " +
                                                          std::to_string(body));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::filesystem::path& path)
{
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw IdxError(IdxError::Kind::unreadable, "zlib init failed for " + path.string());
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    std::vector<std::uint8_t> out;
    std::uint8_t chunk[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk;
        zs.avail_out = sizeof(chunk);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IdxError(IdxError::Kind::unreadable, "corrupt gzip stream in " + path.string());
        }
        out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw IdxError(IdxError::Kind::truncated, "truncated gzip stream in " + path.string());
        }
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace

Tensor parse_idx_images(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 4) throw IdxError(IdxError::Kind::truncated, "idx images: file shorter than its magic number");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != idx_images_magic)
        throw IdxError(IdxError::Kind::wrong_magic,
                       "idx images: wrong magic " + hex(magic) + ", expected " + hex(idx_images_magic));
    if (bytes.size() < 16) throw IdxError(IdxError::Kind::truncated, "idx images: truncated header");
    const std::uint32_t n = read_be32(bytes, 4), h = read_be32(bytes, 8), w = read_be32(bytes, 12);
    if (n == 0 || h == 0 || w == 0)
        throw IdxError(IdxError::Kind::size_mismatch, "idx images: header declares an empty dimension");
    check_body(bytes.size(), 16, std::uint64_t{n} * h * w, "idx images");

    std::vector<double> pixels(static_cast<std::size_t>(n) * h * w);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = bytes[16 + i] / 255.0;
    return Tensor({n, 1, h, w}, std::move(pixels));
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 4) throw IdxError(IdxError::Kind::truncated, "idx labels: file shorter than its magic number");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != idx_labels_magic)
        throw IdxError(IdxError::Kind::wrong_magic,
                       "idx labels: wrong magic " + hex(magic) + ", expected " + hex(idx_labels_magic));
    if (bytes.size() < 8) throw IdxError(IdxError::Kind::truncated, "idx labels: truncated header");
    const std::uint32_t n = read_be32(bytes, 4);
    check_body(bytes.size(), 8, n, "idx labels");

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t b = bytes[8 + i];
        if (b > 9)
            throw IdxError(IdxError::Kind::label_out_of_range,
                           "idx labels: label " + std::to_string(b) + " at index " + std::to_string(i) + " not in [0, 9]");
        labels[i] = b;
    }
    return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const Tensor& images)
{
    if (images.rank() != 4 || images.dim(1) != 1)
        throw ShapeError("serialize_idx_images expects N x 1 x H x W, got " + shape_string(images.shape()));
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.size());
    write_be32(out, idx_images_magic);
    write_be32(out, static_cast<std::uint32_t>(images.dim(0)));
    write_be32(out, static_cast<std::uint32_t>(images.dim(2)));
    write_be32(out, static_cast<std::uint32_t>(images.dim(3)));
    for (double v : images.values())
        out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
    return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const int> labels)
{
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, idx_labels_magic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) out.push_back(static_cast<std::uint8_t>(l));
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError(IdxError::Kind::unreadable, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path);
    return bytes;
}

IdxDataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels)
{
    auto named = [](const std::filesystem::path& path, auto parse) {
        const auto bytes = read_file_bytes(path);
        try {
            return parse(bytes);
        } catch (const IdxError& e) {
            throw IdxError(e.kind(), path.string() + ": " + e.what());
        }
    };
    IdxDataset data{named(images, [](const auto& b) { return parse_idx_images(b); }),
                    named(labels, [](const auto& b) { return parse_idx_labels(b); })};
    if (data.images.dim(0) != data.labels.size())
        throw IdxError(IdxError::Kind::size_mismatch, images.string() + " holds " + std::to_string(data.images.dim(0)) +
                                                          " images but " + labels.string() + " holds " +
                                                          std::to_string(data.labels.size()) + " labels");
    return data;
}

IdxDataset slice(const IdxDataset& data, std::size_t first, std::size_t count)
{
    if (count == 0 || first + count > data.size())
        throw std::out_of_range("slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                                ") outside dataset of " + std::to_string(data.size()));
    std::vector<std::size_t> rows(count);
    std::iota(rows.begin(), rows.end(), first);
    Batch b = gather(data, rows);
    return {std::move(b.images), std::move(b.labels)};
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                                    std::uint64_t epoch)
{
    if (batch == 0 || batch > n)
        throw std::invalid_argument("batch size " + std::to_string(batch) + " must be in [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, epoch));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start + batch <= n; start += batch)
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + batch));
    return out;
}

Batch gather(const IdxDataset& data, std::span<const std::size_t> rows)
{
    const Shape& shape = data.images.shape();
    const std::size_t per = shape[1] * shape[2] * shape[3];
    std::vector<double> pixels(rows.size() * per);
    std::vector<int> labels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= data.size()) throw std::out_of_range("row " + std::to_string(rows[r]) + " outside dataset");
        std::copy_n(data.images.values().begin() + static_cast<std::ptrdiff_t>(rows[r] * per), per,
                    pixels.begin() + static_cast<std::ptrdiff_t>(r * per));
        labels[r] = data.labels[rows[r]];
    }
    return {Tensor({rows.size(), shape[1], shape[2], shape[3]}, std::move(pixels)), std::move(labels)};
}

}  // namespace tae
