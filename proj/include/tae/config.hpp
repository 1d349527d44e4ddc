#pragma once

#include "tae/adam.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tae {

enum class Architecture { conv, dense };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

struct LossWeights {
    double reconstruction = 1.0;
    double spring = 0.01;
    double quantile = 0.01;
    double classifier = 0.1;
};

/// Everything needed to rebuild a model and rerun its training bit-for-bit.
struct TaeConfig {
    std::size_t torus_dims = 3;
    std::size_t batch_size = 128;
    Architecture arch = Architecture::conv;

    std::vector<std::size_t> conv_channels{8, 16, 32};
    std::size_t kernel_size = 3;
    std::vector<std::size_t> dense_hidden_widths{256};  // dense architecture only: 784 -> 256 -> encoder output
    std::size_t encoder_output_width = 64;
    std::vector<std::size_t> classifier_widths{32, 32};

    LossWeights weights;
    double radius_mu = 1.0;
    double radius_sigma = 0.1;

    nn::AdamHyper adam;
    std::size_t epochs = 20;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Flat JSON object; keys listed in config_keys().
nlohmann::json to_json(const TaeConfig& config);
/// Starts from `base` and overrides every key present. Unknown keys are rejected.
TaeConfig config_from_json(const nlohmann::json& j, TaeConfig base = {});
const std::vector<std::string>& config_keys();

}  // namespace tae
