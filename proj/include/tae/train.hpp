#pragma once

#include "tae/mnist.hpp"
#include "tae/model.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tae {

/// A loss term became NaN or infinite; `term()` names the first such term.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string term, const std::string& what)
        : std::runtime_error(what), term_(std::move(term))
    { }

    const std::string& term() const { return term_; }

private:
    std::string term_;
};

/// Batch-averaged loss terms (unweighted) and classifier accuracy for one epoch.
struct EpochRecord {
    std::size_t epoch = 0;
    double loss_rec = 0.0;
    double loss_spring = 0.0;
    double loss_quant = 0.0;
    double loss_cls = 0.0;
    double cls_accuracy = 0.0;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;

    /// Header `epoch,loss_rec,loss_spring,loss_quant,loss_cls,cls_accuracy`, values at 17 significant digits.
    std::string to_csv() const;
};

struct TrainHooks {
    std::function<void(const EpochRecord&)> on_epoch;
    std::function<void(const std::string&)> warn;
};

/// Runs config().epochs epochs of Adam over shuffled full batches. Deterministic given the seed.
TrainingLog train(TaeModel& model, const IdxDataset& data, const TrainHooks& hooks = {});

/// One Adam step on a single batch; returns the pre-step breakdown.
LossBreakdown train_step(TaeModel& model, nn::AdamState& adam, const Batch& batch, const QuantileTargets& targets);

/// Per-pixel MSE, accuracy and latents over a whole dataset, evaluated in chunks.
struct Evaluation {
    double reconstruction_mse = 0.0;
    double cls_accuracy = 0.0;
    LatentBatch latent;
};

Evaluation evaluate(const TaeModel& model, const IdxDataset& data, std::size_t chunk = 500);

}  // namespace tae
