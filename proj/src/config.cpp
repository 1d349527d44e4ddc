#include "tae/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace tae {

std::string to_string(Architecture arch)
{
    return arch == Architecture::conv ? "conv" : "dense";
}

Architecture parse_architecture(const std::string& name)
{
    if (name == "conv") return Architecture::conv;
    if (name == "dense") return Architecture::dense;
    throw std::invalid_argument("unknown architecture '" + name + "', expected conv or dense");
}

void TaeConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (torus_dims < 1) fail("d must be at least 1");
    if (batch_size < 1) fail("batch_size must be at least 1");
    if ((weights.spring > 0.0 || weights.quantile > 0.0) && batch_size < 2)
        fail("batch_size must be at least 2 when lambda_spring or lambda_quant is positive");
    for (double w : {weights.reconstruction, weights.spring, weights.quantile, weights.classifier})
        if (!(w >= 0.0)) fail("loss weights must be non-negative");
    if (!(radius_sigma > 0.0)) fail("radius_sigma must be positive");
    if (arch == Architecture::conv && conv_channels.size() != 3) fail("conv_channels must list exactly 3 layers");
    if (kernel_size < 1) fail("kernel_size must be positive");
    if (encoder_output_width < 1) fail("encoder_output_width must be positive");
    auto positive = [](const std::vector<std::size_t>& v) {
        return std::all_of(v.begin(), v.end(), [](std::size_t x) { return x > 0; });
    };
    if (!positive(conv_channels) || !positive(dense_hidden_widths) || !positive(classifier_widths))
        fail("layer widths must be positive");
    if (classifier_widths.size() != 2) fail("classifier_widths must list the 2 hidden widths of the 3-layer classifier");
    if (!(adam.learning_rate > 0.0)) fail("learning_rate must be positive");
}

nlohmann::json to_json(const TaeConfig& c)
{
    return nlohmann::json{
        {"d", c.torus_dims},
        {"batch_size", c.batch_size},
        {"arch", to_string(c.arch)},
        {"conv_channels", c.conv_channels},
        {"kernel_size", c.kernel_size},
        {"dense_hidden_widths", c.dense_hidden_widths},
        {"encoder_output_width", c.encoder_output_width},
        {"classifier_widths", c.classifier_widths},
        {"lambda_rec", c.weights.reconstruction},
        {"lambda_spring", c.weights.spring},
        {"lambda_quant", c.weights.quantile},
        {"lambda_cls", c.weights.classifier},
        {"radius_mu", c.radius_mu},
        {"radius_sigma", c.radius_sigma},
        {"learning_rate", c.adam.learning_rate},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"adam_epsilon", c.adam.epsilon},
        {"epochs", c.epochs},
        {"seed", c.seed},
    };
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        const nlohmann::json defaults = to_json(TaeConfig{});
        std::vector<std::string> k;
        for (const auto& [key, value] : defaults.items()) k.push_back(key);
        return k;
    }();
    return keys;
}

TaeConfig config_from_json(const nlohmann::json& j, TaeConfig c)
{
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    const auto& known = config_keys();
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("config: unknown key '" + key + "'");

    try {
        auto take = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        take("d", c.torus_dims);
        take("batch_size", c.batch_size);
        if (j.contains("arch")) c.arch = parse_architecture(j.at("arch").get<std::string>());
        take("conv_channels", c.conv_channels);
        take("kernel_size", c.kernel_size);
        take("dense_hidden_widths", c.dense_hidden_widths);
        take("encoder_output_width", c.encoder_output_width);
        take("classifier_widths", c.classifier_widths);
        take("lambda_rec", c.weights.reconstruction);
        take("lambda_spring", c.weights.spring);
        take("lambda_quant", c.weights.quantile);
        take("lambda_cls", c.weights.classifier);
        take("radius_mu", c.radius_mu);
        take("radius_sigma", c.radius_sigma);
        take("learning_rate", c.adam.learning_rate);
        take("beta1", c.adam.beta1);
        take("beta2", c.adam.beta2);
        take("adam_epsilon", c.adam.epsilon);
        take("epochs", c.epochs);
        take("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace tae
