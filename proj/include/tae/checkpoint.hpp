#pragma once

#include "tae/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tae {

inline constexpr char checkpoint_magic[4] = {'T', 'A', 'E', '1'};
inline constexpr std::uint16_t checkpoint_version = 1;

class CheckpointError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, version_mismatch, truncated, malformed };

    CheckpointError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    { }

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Layout, all integers little-endian:
//   "TAE1" | u16 version | u32 config length | config JSON (UTF-8)
//   u32 parameter count, then per parameter:
//   u32 name length | name | u32 rank | rank x u32 dims | product(dims) x f64
std::vector<std::uint8_t> checkpoint_bytes(const TaeModel& model);
TaeModel model_from_checkpoint_bytes(std::span<const std::uint8_t> bytes);

void save_checkpoint(const TaeModel& model, const std::filesystem::path& path);
TaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tae
