#include "tae/train.hpp"

#include "tae/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace tae {

std::string TrainingLog::to_csv() const
{
    std::string out = "epoch,loss_rec,loss_spring,loss_quant,loss_cls,cls_accuracy\n";
    char line[256];
    for (const auto& e : epochs) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.loss_rec, e.loss_spring,
                      e.loss_quant, e.loss_cls, e.cls_accuracy);
        out += line;
    }
    return out;
}

LossBreakdown train_step(TaeModel& model, nn::AdamState& adam, const Batch& batch, const QuantileTargets& targets)
{
    Graph g;
    ModelGraph mg(g, model);
    const LossVars vars = build_total_loss(mg, batch.images, batch.labels, targets);
    const LossBreakdown b = read_breakdown(g, vars, batch.labels);

    const std::pair<const char*, double> terms[] = {
        {"reconstruction", b.reconstruction}, {"spring", b.spring}, {"quantile", b.quantile}, {"classifier", b.classifier}};
    for (const auto& [name, value] : terms)
        if (!std::isfinite(value))
            throw NumericError(name, std::string("non-finite ") + name + " loss (" + std::to_string(value) + ")");

    model.zero_grad();
    g.backward(vars.total);
    auto params = model.parameter_pointers();
    adam.update(params);
    return b;
}

TrainingLog train(TaeModel& model, const IdxDataset& data, const TrainHooks& hooks)
{
    const TaeConfig& c = model.config();
    if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
    if (c.batch_size > data.size())
        throw std::invalid_argument("train: batch size " + std::to_string(c.batch_size) + " exceeds dataset size " +
                                    std::to_string(data.size()));
    if (c.batch_size < 8 && hooks.warn)
        hooks.warn("batch size " + std::to_string(c.batch_size) +
                   " is below 8; sorted distribution losses carry little signal at this size");

    const auto targets = cached_quantile_targets(c.batch_size, c.radius_mu, c.radius_sigma);
    auto params = model.parameter_pointers();
    nn::AdamState adam(c.adam, params);

    TrainingLog log;
    for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch + 1;
        std::size_t correct = 0, seen = 0;
        const auto schedule = epoch_batches(data.size(), c.batch_size, c.seed, epoch);
        for (const auto& rows : schedule) {
            const Batch batch = gather(data, rows);
            const LossBreakdown b = train_step(model, adam, batch, *targets);
            rec.loss_rec += b.reconstruction;
            rec.loss_spring += b.spring;
            rec.loss_quant += b.quantile;
            rec.loss_cls += b.classifier;
            correct += b.correct;
            seen += rows.size();
        }
        const double n = static_cast<double>(schedule.size());
        rec.loss_rec /= n;
        rec.loss_spring /= n;
        rec.loss_quant /= n;
        rec.loss_cls /= n;
        rec.cls_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        log.epochs.push_back(rec);
        if (hooks.on_epoch) hooks.on_epoch(rec);
    }
    return log;
}

Evaluation evaluate(const TaeModel& model, const IdxDataset& data, std::size_t chunk)
{
    const std::size_t N = data.size(), d = model.config().torus_dims;
    if (N == 0) throw std::invalid_argument("evaluate: dataset is empty");
    chunk = std::max<std::size_t>(1, chunk);

    Evaluation ev{0.0, 0.0, {Tensor({N, d}), Tensor({N, d}), Tensor({N, d}), Tensor({N, d})}};
    double squared = 0.0;
    std::size_t correct = 0;
    for (std::size_t first = 0; first < N; first += chunk) {
        const std::size_t count = std::min(chunk, N - first);
        std::vector<std::size_t> rows(count);
        std::iota(rows.begin(), rows.end(), first);
        const Batch batch = gather(data, rows);

        Graph g;
        ModelGraph mg(g, model);
        const EncodedVars lat = mg.encode(g.constant(batch.images, "images"));
        const Tensor& recon = g.value(mg.decode(lat.x, lat.y));
        const Tensor& logits = g.value(mg.classify(lat.polar.phi));
        for (std::size_t i = 0; i < recon.size(); ++i) {
            const double diff = recon[i] - batch.images[i];
            squared += diff * diff;
        }
        correct += nn::count_correct(logits, batch.labels);

        const std::pair<Var, Tensor*> outputs[] = {{lat.x, &ev.latent.x},
                                                   {lat.y, &ev.latent.y},
                                                   {lat.polar.rho, &ev.latent.rho},
                                                   {lat.polar.phi, &ev.latent.phi}};
        for (const auto& [var, dst] : outputs)
            std::copy(g.value(var).values().begin(), g.value(var).values().end(),
                      dst->values().begin() + static_cast<std::ptrdiff_t>(first * d));
    }
    ev.reconstruction_mse = squared / static_cast<double>(data.images.size());
    ev.cls_accuracy = static_cast<double>(correct) / static_cast<double>(N);
    return ev;
}

}  // namespace tae
