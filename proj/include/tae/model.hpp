#pragma once

#include "tae/config.hpp"
#include "tae/graph.hpp"
#include "tae/polar.hpp"
#include "tae/regularizers.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tae {

inline constexpr std::size_t image_side = 28;
inline constexpr std::size_t class_count = 10;

struct Parameter {
    std::string name;
    Tensor value;
};

/// Encoder, X/Y heads, decoder and auxiliary classifier parameters plus the
/// configuration that produced them.
///
/// The decoder reads the concatenated [X | Y] latent only; the polar
/// coordinates feed the regularizers and the classifier.
class TaeModel {
public:
    /// Glorot-uniform weights and zero biases drawn from config.seed.
    explicit TaeModel(TaeConfig config);
    /// Adopts existing parameters (used by checkpoint loading); names and shapes must match the layout.
    TaeModel(TaeConfig config, std::vector<Parameter> params);

    const TaeConfig& config() const { return config_; }
    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }

    Tensor& param(std::string_view name);
    const Tensor& param(std::string_view name) const;

    std::vector<Tensor*> parameter_pointers();
    void zero_grad();

    /// Parameter names and shapes implied by a configuration, in storage order.
    static std::vector<std::pair<std::string, Shape>> layout(const TaeConfig& config);

private:
    TaeConfig config_;
    std::vector<Parameter> params_;
};

/// Latent of a batch: Cartesian heads and their polar form.
struct LatentBatch {
    Tensor x;
    Tensor y;
    Tensor rho;  ///< x^2 + y^2
    Tensor phi;  ///< atan2(y, x)
};

struct EncodedVars {
    Var x;
    Var y;
    PolarVars polar;
};

/// A model's parameters placed on a graph. The mutable constructor binds them
/// as trainable leaves (gradients flow back into the model); the const one
/// binds copies as constants.
class ModelGraph {
public:
    ModelGraph(Graph& g, TaeModel& model);
    ModelGraph(Graph& g, const TaeModel& model);

    Graph& graph() { return g_; }
    const TaeConfig& config() const { return model_.config(); }
    Var param(std::string_view name) const;

    EncodedVars encode(Var images);
    Var decode(Var x, Var y);
    Var classify(Var phi);

private:
    Var dense_layer(std::string_view prefix, Var in);

    Graph& g_;
    const TaeModel& model_;
    std::vector<Var> vars_;
};

LatentBatch encode(const TaeModel& model, const Tensor& images);
Tensor decode(const TaeModel& model, const Tensor& x, const Tensor& y);
Tensor classify(const TaeModel& model, const Tensor& phi);

struct LossBreakdown {
    double reconstruction = 0.0;
    double spring = 0.0;
    double quantile = 0.0;
    double classifier = 0.0;
    double total = 0.0;
    std::size_t correct = 0;
};

struct LossVars {
    Var reconstruction;
    Var spring;
    Var quantile;
    Var classifier;
    Var total;
    Var logits;
    EncodedVars latent;
    Var reconstruction_image;
};

/// Builds lambda_rec*MSE + lambda_spring*spring + lambda_quant*quantile + lambda_cls*CE on `mg`.
LossVars build_total_loss(ModelGraph& mg, const Tensor& images, std::span<const int> labels,
                          const QuantileTargets& targets);

LossBreakdown read_breakdown(const Graph& g, const LossVars& vars, std::span<const int> labels);

/// Forward-only evaluation of the total loss on one batch.
LossBreakdown total_loss(const TaeModel& model, const Tensor& images, std::span<const int> labels);

}  // namespace tae
