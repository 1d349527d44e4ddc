#include "tae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace tae {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value)
{
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes)
        : bytes_(bytes)
    { }

    template <typename T>
    T get(const char* what)
    {
        need(sizeof(T), what);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string string(std::size_t n, const char* what)
    {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    void doubles(std::vector<double>& dst, const char* what)
    {
        need(dst.size() * sizeof(double), what);
        std::memcpy(dst.data(), bytes_.data() + pos_, dst.size() * sizeof(double));
        pos_ += dst.size() * sizeof(double);
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* what) const
    {
        if (bytes_.size() - pos_ < n)
            throw CheckpointError(CheckpointError::Kind::truncated,
                                  std::string("checkpoint truncated while reading ") + what);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> checkpoint_bytes(const TaeModel& model)
{
    std::vector<std::uint8_t> out(std::begin(checkpoint_magic), std::end(checkpoint_magic));
    put<std::uint16_t>(out, checkpoint_version);
    const std::string config = to_json(model.config()).dump();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
    out.insert(out.end(), config.begin(), config.end());

    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.parameters().size()));
    for (const auto& p : model.parameters()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
        out.insert(out.end(), p.name.begin(), p.name.end());
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
        for (std::size_t dim : p.value.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
        for (double v : p.value.values()) put<double>(out, v);
    }
    return out;
}

TaeModel model_from_checkpoint_bytes(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < sizeof(checkpoint_magic))
        throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint shorter than its magic");
    if (std::memcmp(bytes.data(), checkpoint_magic, sizeof(checkpoint_magic)) != 0)
        throw CheckpointError(CheckpointError::Kind::bad_magic, "bad magic: not a TAE1 checkpoint");

    Reader in(bytes.subspan(sizeof(checkpoint_magic)));
    const auto version = in.get<std::uint16_t>("version");
    if (version != checkpoint_version)
        throw CheckpointError(CheckpointError::Kind::version_mismatch,
                              "checkpoint version " + std::to_string(version) + " unsupported, expected " +
                                  std::to_string(checkpoint_version));

    const auto config_len = in.get<std::uint32_t>("config length");
    const std::string config_text = in.string(config_len, "config");
    TaeConfig config;
    try {
        config = config_from_json(nlohmann::json::parse(config_text));
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointError::Kind::malformed, std::string("checkpoint config unreadable: ") + e.what());
    }

    const auto count = in.get<std::uint32_t>("parameter count");
    std::vector<Parameter> params;
    params.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = in.get<std::uint32_t>("parameter name length");
        std::string name = in.string(name_len, "parameter name");
        const auto rank = in.get<std::uint32_t>("parameter rank");
        if (rank == 0 || rank > 8)
            throw CheckpointError(CheckpointError::Kind::malformed, "parameter " + name + " has rank " + std::to_string(rank));
        Shape shape(rank);
        for (auto& dim : shape) dim = in.get<std::uint32_t>("parameter shape");
        std::vector<double> values(element_count(shape));
        in.doubles(values, "parameter values");
        try {
            params.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
        } catch (const ShapeError& e) {
            throw CheckpointError(CheckpointError::Kind::malformed, e.what());
        }
    }
    if (!in.at_end()) throw CheckpointError(CheckpointError::Kind::malformed, "trailing bytes after last parameter");

    try {
        return TaeModel(std::move(config), std::move(params));
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(CheckpointError::Kind::malformed, e.what());
    }
}

void save_checkpoint(const TaeModel& model, const std::filesystem::path& path)
{
    const auto bytes = checkpoint_bytes(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointError::Kind::io, "cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointError::Kind::io, "short write to " + path.string());
}

TaeModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::io, "cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_checkpoint_bytes(bytes);
}

}  // namespace tae
