// Copyright 2026 The skinscreen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "skinscreen/classifier.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {
namespace {

int class_index(Label label) { return label == Label::monkeypox ? 0 : 1; }

struct Batch {
  nn::Tensor input;
  std::vector<int> targets;
};

Batch make_batch(const Classifier& model, const std::vector<LabeledImage>& data,
                 std::span<const std::size_t> indices) {
  std::vector<ScreeningImage> images;
  Batch batch;
  images.reserve(indices.size());
  for (std::size_t i : indices) {
    images.push_back(data[i].image);
    batch.targets.push_back(class_index(data[i].label));
  }
  batch.input = model.to_input(images);
  return batch;
}

}  // namespace

EvalStats evaluate_set(Classifier& model, const std::vector<LabeledImage>& data, int batch_size) {
  if (data.empty()) return {};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    const auto idx = std::span(order).subspan(start, end - start);
    Batch batch = make_batch(model, data, idx);
    const nn::Tensor logits = model.forward(batch.input, nn::Mode::eval);
    const auto ce = nn::softmax_cross_entropy(logits, batch.targets);
    loss += ce.loss * static_cast<double>(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const int predicted = logits[b * 2] >= logits[b * 2 + 1] ? 0 : 1;
      correct += predicted == batch.targets[b] ? 1 : 0;
    }
  }
  return {loss / static_cast<double>(data.size()), static_cast<double>(correct) / static_cast<double>(data.size())};
}

TrainHistory train(Classifier& model, const std::vector<LabeledImage>& train_set,
                   const std::vector<LabeledImage>& val_set, const TrainConfig& config,
                   const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw TrainingError("training set is empty");
  if (val_set.empty()) throw TrainingError("validation set is empty");
  const auto positives = std::count_if(train_set.begin(), train_set.end(),
                                       [](const LabeledImage& x) { return x.label == Label::monkeypox; });
  if (positives == 0 || static_cast<std::size_t>(positives) == train_set.size()) {
    throw TrainingError("training set contains a single class");
  }
  if (config.input_size != model.backbone_spec().resolution) {
    throw TrainingError("train config input_size differs from the model resolution");
  }

  nn::Adam::Options opt;
  opt.learning_rate = static_cast<float>(config.learning_rate);
  opt.beta1 = static_cast<float>(config.momentum);
  opt.beta2 = static_cast<float>(config.beta2);
  nn::Adam adam(model.parameters(), opt);
  model.head_dropout().reseed(config.seed ^ 0x9E3779B97F4A7C15ull);

  TrainHistory history;
  history.steps_per_epoch = steps_per_epoch(train_set.size(), config.batch_size);
  std::vector<float> best_state;
  double best_acc = -1.0, best_loss = 0.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    adam.set_learning_rate(static_cast<float>(lr));
    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (int step = 0; step < history.steps_per_epoch; ++step) {
      const std::size_t start = static_cast<std::size_t>(step) * static_cast<std::size_t>(config.batch_size);
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto idx = std::span(order).subspan(start, end - start);
      Batch batch = make_batch(model, train_set, idx);
      const LossBreakdown loss = model.loss_and_gradients(batch.input, batch.targets);
      if (!std::isfinite(loss.total())) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " step " << step << " (data " << loss.data_loss
            << ", penalty " << loss.penalty << ", lr " << lr << ")";
        throw TrainingError(msg.str());
      }
      adam.step();
      epoch_loss += loss.total() * static_cast<double>(idx.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = lr;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    stats.train_accuracy = evaluate_set(model, train_set).accuracy;
    const EvalStats val = evaluate_set(model, val_set);
    stats.val_loss = val.loss;
    stats.val_accuracy = val.accuracy;
    history.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (val.accuracy > best_acc || (val.accuracy == best_acc && val.loss < best_loss)) {
      best_acc = val.accuracy;
      best_loss = val.loss;
      history.best_epoch = epoch;
      best_state = model.state();
    }
  }
  model.set_state(best_state);
  return history;
}

}  // namespace skinscreen
