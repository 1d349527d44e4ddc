#include "tae/model.hpp"

#include "tae/ops.hpp"
#include "tae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tae {

namespace {

// 28 -> 14 -> 7 -> 4 through three 2x2 pools (the last pads 7 to 8 with -inf).
constexpr std::size_t bottleneck_side = 4;
constexpr std::size_t pixels = image_side * image_side;

std::vector<std::size_t> dense_encoder_chain(const TaeConfig& c)
{
    std::vector<std::size_t> chain{pixels};
    chain.insert(chain.end(), c.dense_hidden_widths.begin(), c.dense_hidden_widths.end());
    return chain;
}

}  // namespace

std::vector<std::pair<std::string, Shape>> TaeModel::layout(const TaeConfig& c)
{
    std::vector<std::pair<std::string, Shape>> l;
    auto dense = [&](const std::string& name, std::size_t in, std::size_t out) {
        l.push_back({name + ".w", {in, out}});
        l.push_back({name + ".b", {out}});
    };
    auto conv = [&](const std::string& name, std::size_t in, std::size_t out, std::size_t k) {
        l.push_back({name + ".w", {out, in, k, k}});
        l.push_back({name + ".b", {out}});
    };

    const std::size_t d = c.torus_dims, E = c.encoder_output_width, k = c.kernel_size;
    if (c.arch == Architecture::conv) {
        const auto& ch = c.conv_channels;
        conv("enc.conv1", 1, ch[0], k);
        conv("enc.conv2", ch[0], ch[1], k);
        conv("enc.conv3", ch[1], ch[2], k);
        dense("enc.out", ch[2] * bottleneck_side * bottleneck_side, E);
    } else {
        const auto chain = dense_encoder_chain(c);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            dense("enc.fc" + std::to_string(i + 1), chain[i], chain[i + 1]);
        dense("enc.out", chain.back(), E);
    }
    dense("head.x", E, d);
    dense("head.y", E, d);

    dense("dec.in", 2 * d, E);
    if (c.arch == Architecture::conv) {
        const auto& ch = c.conv_channels;
        dense("dec.expand", E, ch[2] * bottleneck_side * bottleneck_side);
        conv("dec.conv1", ch[2], ch[1], k);
        conv("dec.conv2", ch[1], ch[0], k);
        conv("dec.conv3", ch[0], ch[0], k);
        conv("dec.out", ch[0], 1, k);
    } else {
        const auto chain = dense_encoder_chain(c);
        std::size_t width = E;
        for (std::size_t i = chain.size() - 1; i >= 1; --i) {
            dense("dec.fc" + std::to_string(chain.size() - i), width, chain[i]);
            width = chain[i];
        }
        dense("dec.out", width, pixels);
    }

    dense("cls.l1", d, c.classifier_widths[0]);
    dense("cls.l2", c.classifier_widths[0], c.classifier_widths[1]);
    dense("cls.l3", c.classifier_widths[1], class_count);
    return l;
}

TaeModel::TaeModel(TaeConfig config)
    : config_(std::move(config))
{
    config_.validate();
    Rng rng(config_.seed);
    for (auto& [name, shape] : layout(config_)) {
        Tensor t(shape);
        if (shape.size() >= 2) {
            std::size_t fan_in, fan_out;
            if (shape.size() == 2) {
                fan_in = shape[0];
                fan_out = shape[1];
            } else {
                const std::size_t receptive = shape[2] * shape[3];
                fan_in = shape[1] * receptive;
                fan_out = shape[0] * receptive;
            }
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (double& v : t.values()) v = rng.uniform(-limit, limit);
        }
        params_.push_back({name, std::move(t)});
    }
}

TaeModel::TaeModel(TaeConfig config, std::vector<Parameter> params)
    : config_(std::move(config)), params_(std::move(params))
{
    config_.validate();
    const auto expected = layout(config_);
    if (expected.size() != params_.size())
        throw std::invalid_argument("model expects " + std::to_string(expected.size()) + " parameters, got " +
                                    std::to_string(params_.size()));
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (expected[i].first != params_[i].name || expected[i].second != params_[i].value.shape())
            throw std::invalid_argument("parameter " + std::to_string(i) + " is " + params_[i].name + " " +
                                        shape_string(params_[i].value.shape()) + ", expected " + expected[i].first +
                                        " " + shape_string(expected[i].second));
}

Tensor& TaeModel::param(std::string_view name)
{
    return const_cast<Tensor&>(std::as_const(*this).param(name));
}

const Tensor& TaeModel::param(std::string_view name) const
{
    for (const auto& p : params_)
        if (p.name == name) return p.value;
    throw std::out_of_range("no parameter named " + std::string(name));
}

std::vector<Tensor*> TaeModel::parameter_pointers()
{
    std::vector<Tensor*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(&p.value);
    return out;
}

void TaeModel::zero_grad()
{
    for (auto& p : params_) p.value.zero_grad();
}

ModelGraph::ModelGraph(Graph& g, TaeModel& model)
    : g_(g), model_(model)
{
    for (auto& p : model.parameters()) vars_.push_back(g.parameter(p.value, p.name));
}

ModelGraph::ModelGraph(Graph& g, const TaeModel& model)
    : g_(g), model_(model)
{
    for (const auto& p : model.parameters()) vars_.push_back(g.constant(Tensor(p.value.shape(), p.value.values()), p.name));
}

Var ModelGraph::param(std::string_view name) const
{
    const auto& params = model_.parameters();
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i].name == name) return vars_[i];
    throw std::out_of_range("no parameter named " + std::string(name));
}

Var ModelGraph::dense_layer(std::string_view prefix, Var in)
{
    const std::string p(prefix);
    return nn::dense(g_, in, param(p + ".w"), param(p + ".b"));
}

EncodedVars ModelGraph::encode(Var images)
{
    const TaeConfig& c = model_.config();
    const Tensor& img = g_.value(images);
    if (img.rank() != 4 || img.dim(1) != 1 || img.dim(2) != image_side || img.dim(3) != image_side)
        throw ShapeError("encode expects S x 1 x 28 x 28 images, got " + shape_string(img.shape()));
    const std::size_t S = img.dim(0);

    Var h = images;
    if (c.arch == Architecture::conv) {
        for (const char* layer : {"enc.conv1", "enc.conv2", "enc.conv3"}) {
            const std::string p(layer);
            h = nn::conv2d(g_, h, param(p + ".w"), param(p + ".b"), nn::Padding::same);
            h = nn::relu(g_, h);
            h = nn::maxpool2(g_, h);
        }
        h = nn::reshape(g_, h, {S, g_.value(h).size() / S});
    } else {
        h = nn::reshape(g_, h, {S, pixels});
        for (std::size_t i = 1; i <= c.dense_hidden_widths.size(); ++i)
            h = nn::relu(g_, dense_layer("enc.fc" + std::to_string(i), h));
    }
    h = nn::relu(g_, dense_layer("enc.out", h));

    Var x = dense_layer("head.x", h);
    Var y = dense_layer("head.y", h);
    return {x, y, to_polar(g_, x, y)};
}

Var ModelGraph::decode(Var x, Var y)
{
    const TaeConfig& c = model_.config();
    const std::size_t S = g_.value(x).dim(0);
    if (g_.value(x).rank() != 2 || g_.value(x).dim(1) != c.torus_dims)
        throw ShapeError("decode expects S x d latents, got " + shape_string(g_.value(x).shape()));

    Var h = nn::concat_columns(g_, x, y);
    h = nn::relu(g_, dense_layer("dec.in", h));
    if (c.arch == Architecture::conv) {
        h = nn::relu(g_, dense_layer("dec.expand", h));
        h = nn::reshape(g_, h, {S, c.conv_channels[2], bottleneck_side, bottleneck_side});
        for (const char* layer : {"dec.conv1", "dec.conv2", "dec.conv3"}) {
            const std::string p(layer);
            h = nn::upsample2(g_, h);
            h = nn::relu(g_, nn::conv2d(g_, h, param(p + ".w"), param(p + ".b"), nn::Padding::same));
        }
        h = nn::conv2d(g_, h, param("dec.out.w"), param("dec.out.b"), nn::Padding::same);
        // 4 * 2^3 = 32 pixels per side; trim back to 28.
        h = nn::center_crop(g_, h, image_side, image_side);
        return nn::sigmoid(g_, h);
    }
    for (std::size_t i = 1; i <= c.dense_hidden_widths.size(); ++i)
        h = nn::relu(g_, dense_layer("dec.fc" + std::to_string(i), h));
    h = nn::sigmoid(g_, dense_layer("dec.out", h));
    return nn::reshape(g_, h, {S, 1, image_side, image_side});
}

Var ModelGraph::classify(Var phi)
{
    Var h = nn::relu(g_, dense_layer("cls.l1", phi));
    h = nn::relu(g_, dense_layer("cls.l2", h));
    return dense_layer("cls.l3", h);
}

LatentBatch encode(const TaeModel& model, const Tensor& images)
{
    Graph g;
    ModelGraph mg(g, model);
    EncodedVars v = mg.encode(g.constant(images, "images"));
    return {g.value(v.x), g.value(v.y), g.value(v.polar.rho), g.value(v.polar.phi)};
}

Tensor decode(const TaeModel& model, const Tensor& x, const Tensor& y)
{
    Graph g;
    ModelGraph mg(g, model);
    return g.value(mg.decode(g.constant(x, "x"), g.constant(y, "y")));
}

Tensor classify(const TaeModel& model, const Tensor& phi)
{
    Graph g;
    ModelGraph mg(g, model);
    return g.value(mg.classify(g.constant(phi, "phi")));
}

LossVars build_total_loss(ModelGraph& mg, const Tensor& images, std::span<const int> labels,
                          const QuantileTargets& targets)
{
    Graph& g = mg.graph();
    const LossWeights& w = mg.config().weights;
    LossVars v{};
    v.latent = mg.encode(g.constant(images, "images"));
    v.reconstruction_image = mg.decode(v.latent.x, v.latent.y);
    v.logits = mg.classify(v.latent.polar.phi);
    v.reconstruction = nn::mse(g, v.reconstruction_image, images);
    v.spring = spring_loss(g, v.latent.polar.phi);
    v.quantile = quantile_loss(g, v.latent.polar.rho, targets);
    v.classifier = nn::softmax_cross_entropy(g, v.logits, labels);

    Var total = nn::scale(g, v.reconstruction, w.reconstruction);
    total = nn::add(g, total, nn::scale(g, v.spring, w.spring));
    total = nn::add(g, total, nn::scale(g, v.quantile, w.quantile));
    v.total = nn::add(g, total, nn::scale(g, v.classifier, w.classifier));
    return v;
}

LossBreakdown read_breakdown(const Graph& g, const LossVars& vars, std::span<const int> labels)
{
    LossBreakdown b;
    b.reconstruction = g.value(vars.reconstruction)[0];
    b.spring = g.value(vars.spring)[0];
    b.quantile = g.value(vars.quantile)[0];
    b.classifier = g.value(vars.classifier)[0];
    b.total = g.value(vars.total)[0];
    b.correct = nn::count_correct(g.value(vars.logits), labels);
    return b;
}

LossBreakdown total_loss(const TaeModel& model, const Tensor& images, std::span<const int> labels)
{
    const TaeConfig& c = model.config();
    const auto targets = cached_quantile_targets(images.dim(0), c.radius_mu, c.radius_sigma);
    Graph g;
    ModelGraph mg(g, model);
    const LossVars vars = build_total_loss(mg, images, labels, *targets);
    return read_breakdown(g, vars, labels);
}

}  // namespace tae
