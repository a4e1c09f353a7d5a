/*
 * Copyright 2026 The rfxg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rfxg/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "rfxg/error.hpp"
#include "rfxg/random.hpp"

namespace rfxg {
namespace {

FeatureMaps make_maps(std::size_t c, std::size_t h, std::size_t w) {
  return FeatureMaps{c, h, w, std::vector<double>(c * h * w, 0.0)};
}

FeatureMaps image_to_maps(const ImageTensor& image) {
  FeatureMaps out = make_maps(image.channels(), image.height(), image.width());
  const auto data = image.data();
  const std::size_t hw = image.pixel_count();
  const std::size_t ch = image.channels();
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t c = 0; c < ch; ++c) out.values[c * hw + p] = data[p * ch + c];
  }
  return out;
}

std::vector<double> maps_to_image_layout(const FeatureMaps& maps) {
  const std::size_t hw = maps.height * maps.width;
  std::vector<double> out(maps.values.size());
  for (std::size_t c = 0; c < maps.channels; ++c) {
    for (std::size_t p = 0; p < hw; ++p) out[p * maps.channels + c] = maps.values[c * hw + p];
  }
  return out;
}

// Same-padded convolution with an odd k x k kernel.
FeatureMaps conv_forward(const FeatureMaps& in, const std::vector<double>& kernel,
                         const std::vector<double>& bias, std::size_t out_channels,
                         std::size_t k) {
  const long h = static_cast<long>(in.height), w = static_cast<long>(in.width);
  const long r = static_cast<long>(k / 2);
  FeatureMaps out = make_maps(out_channels, in.height, in.width);
  for (std::size_t o = 0; o < out_channels; ++o) {
    double* dst = &out.values[o * h * w];
    std::fill(dst, dst + h * w, bias[o]);
    for (std::size_t i = 0; i < in.channels; ++i) {
      const double* src = &in.values[i * h * w];
      for (long dy = 0; dy < static_cast<long>(k); ++dy) {
        for (long dx = 0; dx < static_cast<long>(k); ++dx) {
          const double wt = kernel[((o * in.channels + i) * k + dy) * k + dx];
          const long oy = dy - r, ox = dx - r;
          const long y0 = std::max(0L, -oy), y1 = std::min(h, h - oy);
          const long x0 = std::max(0L, -ox), x1 = std::min(w, w - ox);
          for (long y = y0; y < y1; ++y) {
            double* drow = dst + y * w;
            const double* srow = src + (y + oy) * w + ox;
            for (long x = x0; x < x1; ++x) drow[x] += wt * srow[x];
          }
        }
      }
    }
  }
  return out;
}

// Accumulates kernel/bias gradients and (optionally) the input gradient.
void conv_backward(const FeatureMaps& in, const std::vector<double>& kernel, const FeatureMaps& dz,
                   std::size_t k, std::vector<double>* dkernel, std::vector<double>* dbias,
                   FeatureMaps* din) {
  const long h = static_cast<long>(in.height), w = static_cast<long>(in.width);
  const long r = static_cast<long>(k / 2);
  for (std::size_t o = 0; o < dz.channels; ++o) {
    const double* g = &dz.values[o * h * w];
    if (dbias) {
      double total = 0.0;
      for (long p = 0; p < h * w; ++p) total += g[p];
      (*dbias)[o] += total;
    }
    for (std::size_t i = 0; i < in.channels; ++i) {
      const double* src = &in.values[i * h * w];
      for (long dy = 0; dy < static_cast<long>(k); ++dy) {
        for (long dx = 0; dx < static_cast<long>(k); ++dx) {
          const std::size_t widx = ((o * in.channels + i) * k + dy) * k + dx;
          const long oy = dy - r, ox = dx - r;
          const long y0 = std::max(0L, -oy), y1 = std::min(h, h - oy);
          const long x0 = std::max(0L, -ox), x1 = std::min(w, w - ox);
          if (dkernel) {
            double acc = 0.0;
            for (long y = y0; y < y1; ++y) {
              const double* grow = g + y * w;
              const double* srow = src + (y + oy) * w + ox;
              for (long x = x0; x < x1; ++x) acc += grow[x] * srow[x];
            }
            (*dkernel)[widx] += acc;
          }
          if (din) {
            const double wt = kernel[widx];
            double* dst = &din->values[i * h * w];
            for (long y = y0; y < y1; ++y) {
              const double* grow = g + y * w;
              double* drow = dst + (y + oy) * w + ox;
              for (long x = x0; x < x1; ++x) drow[x] += wt * grow[x];
            }
          }
        }
      }
    }
  }
}

FeatureMaps pool_forward(const FeatureMaps& in) {
  FeatureMaps out = make_maps(in.channels, in.height / 2, in.width / 2);
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) {
        const double s = in.at(c, 2 * y, 2 * x) + in.at(c, 2 * y, 2 * x + 1) +
                         in.at(c, 2 * y + 1, 2 * x) + in.at(c, 2 * y + 1, 2 * x + 1);
        out.values[(c * out.height + y) * out.width + x] = 0.25 * s;
      }
    }
  }
  return out;
}

FeatureMaps pool_backward(const FeatureMaps& dout, std::size_t in_h, std::size_t in_w) {
  FeatureMaps din = make_maps(dout.channels, in_h, in_w);
  for (std::size_t c = 0; c < din.channels; ++c) {
    for (std::size_t y = 0; y < in_h; ++y) {
      for (std::size_t x = 0; x < in_w; ++x) {
        din.values[(c * in_h + y) * in_w + x] = 0.25 * dout.at(c, y / 2, x / 2);
      }
    }
  }
  return din;
}

FeatureMaps relu(const FeatureMaps& in) {
  FeatureMaps out = in;
  for (double& v : out.values) v = v > 0.0 ? v : 0.0;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Architecture

Architecture Architecture::standard(std::size_t side, std::size_t classes) {
  Architecture a;
  a.height = side;
  a.width = side;
  a.channels = 3;
  a.classes = classes;
  a.stages = {{8, 3, true}, {16, 3, true}};
  return a;
}

std::string Architecture::descriptor() const {
  std::string out = fmt::format("input {} {} {} classes {}", height, width, channels, classes);
  for (const auto& s : stages) {
    out += fmt::format(" conv {} {} {}", s.out_channels, s.kernel, s.pool ? "pool" : "nopool");
  }
  return out;
}

Architecture Architecture::parse(const std::string& descriptor) {
  std::istringstream in(descriptor);
  Architecture a;
  std::string word;
  if (!(in >> word) || word != "input" || !(in >> a.height >> a.width >> a.channels)) {
    throw FormatError(fmt::format("bad architecture descriptor '{}'", descriptor));
  }
  if (!(in >> word) || word != "classes" || !(in >> a.classes)) {
    throw FormatError(fmt::format("bad architecture descriptor '{}'", descriptor));
  }
  while (in >> word) {
    ConvStage s;
    std::string pool;
    if (word != "conv" || !(in >> s.out_channels >> s.kernel >> pool) ||
        (pool != "pool" && pool != "nopool")) {
      throw FormatError(fmt::format("bad conv stage in descriptor '{}'", descriptor));
    }
    s.pool = pool == "pool";
    a.stages.push_back(s);
  }
  a.validate();
  return a;
}

void Architecture::validate() const {
  if (height == 0 || width == 0 || (channels != 1 && channels != 3)) {
    throw InvalidArgument("architecture input must be non-empty with 1 or 3 channels");
  }
  if (classes < 2) throw InvalidArgument("architecture needs at least two classes");
  std::size_t h = height, w = width;
  for (const auto& s : stages) {
    if (s.out_channels == 0 || s.kernel == 0 || s.kernel % 2 == 0) {
      throw InvalidArgument("conv stages need positive channels and an odd kernel");
    }
    if (s.pool) {
      if (h % 2 != 0 || w % 2 != 0) throw InvalidArgument("cannot pool an odd extent");
      h /= 2;
      w /= 2;
    }
  }
}

std::size_t NetParameters::count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::vector<double>& t) { n += t.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// ToyConvNet

struct ToyConvNet::Tape {
  std::vector<FeatureMaps> inputs;  // per stage
  std::vector<FeatureMaps> pre;     // per stage, before the rectifier
  std::vector<FeatureMaps> rect;    // per stage, after the rectifier
  FeatureMaps dense_input;
  std::vector<double> logits;
  std::vector<double> probs;
};

ToyConvNet::ToyConvNet(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t in_ch = arch_.channels, h = arch_.height, w = arch_.width;
  for (const auto& s : arch_.stages) {
    params_.conv.push_back({std::vector<double>(s.out_channels * in_ch * s.kernel * s.kernel, 0.0),
                            std::vector<double>(s.out_channels, 0.0)});
    in_ch = s.out_channels;
    if (s.pool) {
      h /= 2;
      w /= 2;
    }
  }
  const std::size_t flat = in_ch * h * w;
  params_.dense_weight.assign(arch_.classes * flat, 0.0);
  params_.dense_bias.assign(arch_.classes, 0.0);
}

ToyConvNet ToyConvNet::initialized(Architecture arch, std::uint64_t seed) {
  ToyConvNet net(std::move(arch));
  Rng rng(seed);
  std::size_t in_ch = net.arch_.channels;
  for (std::size_t s = 0; s < net.arch_.stages.size(); ++s) {
    const auto& st = net.arch_.stages[s];
    const double fan_in = static_cast<double>(in_ch * st.kernel * st.kernel);
    const double fan_out = static_cast<double>(st.out_channels * st.kernel * st.kernel);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : net.params_.conv[s].kernel) v = rng.uniform(-limit, limit);
    in_ch = st.out_channels;
  }
  const double flat = static_cast<double>(net.params_.dense_weight.size() / net.arch_.classes);
  const double limit = std::sqrt(6.0 / (flat + static_cast<double>(net.arch_.classes)));
  for (double& v : net.params_.dense_weight) v = rng.uniform(-limit, limit);
  return net;
}

NetParameters ToyConvNet::zero_like() const {
  NetParameters z = params_;
  z.for_each_tensor([](std::vector<double>& t) { std::fill(t.begin(), t.end(), 0.0); });
  return z;
}

void ToyConvNet::check_image(const ImageTensor& image) const {
  if (image.height() != arch_.height || image.width() != arch_.width ||
      image.channels() != arch_.channels) {
    throw DimensionError(fmt::format("image {}x{}x{} does not match model input {}x{}x{}",
                                     image.height(), image.width(), image.channels(),
                                     arch_.height, arch_.width, arch_.channels));
  }
}

ToyConvNet::Tape ToyConvNet::run(const ImageTensor& image) const {
  check_image(image);
  Tape tape;
  FeatureMaps x = image_to_maps(image);
  for (std::size_t s = 0; s < arch_.stages.size(); ++s) {
    const auto& st = arch_.stages[s];
    FeatureMaps z = conv_forward(x, params_.conv[s].kernel, params_.conv[s].bias,
                                 st.out_channels, st.kernel);
    FeatureMaps a = relu(z);
    FeatureMaps next = st.pool ? pool_forward(a) : a;
    tape.inputs.push_back(std::move(x));
    tape.pre.push_back(std::move(z));
    tape.rect.push_back(std::move(a));
    x = std::move(next);
  }
  tape.dense_input = std::move(x);
  const std::size_t flat = tape.dense_input.size();
  tape.logits.assign(arch_.classes, 0.0);
  for (std::size_t c = 0; c < arch_.classes; ++c) {
    const double* row = &params_.dense_weight[c * flat];
    double acc = params_.dense_bias[c];
    for (std::size_t j = 0; j < flat; ++j) acc += row[j] * tape.dense_input.values[j];
    tape.logits[c] = acc;
  }
  tape.probs = softmax(tape.logits);
  return tape;
}

ForwardRecord ToyConvNet::forward(const ImageTensor& image) const {
  Tape tape = run(image);
  ForwardRecord rec;
  rec.logits = std::move(tape.logits);
  rec.probs = std::move(tape.probs);
  if (!tape.rect.empty()) rec.activations = std::move(tape.rect.back());
  return rec;
}

ForwardRecord ToyConvNet::head_forward(const FeatureMaps& activations) const {
  if (!has_target_layer()) throw InvalidArgument("model has no target layer");
  const auto& last = arch_.stages.back();
  const auto& expected = params_.conv.back().bias;
  if (activations.channels != expected.size()) {
    throw DimensionError("activation channel count does not match the target layer");
  }
  const FeatureMaps x = last.pool ? pool_forward(activations) : activations;
  const std::size_t flat = x.size();
  if (flat * arch_.classes != params_.dense_weight.size()) {
    throw DimensionError("activation shape does not match the target layer");
  }
  ForwardRecord rec;
  rec.logits.assign(arch_.classes, 0.0);
  for (std::size_t c = 0; c < arch_.classes; ++c) {
    double acc = params_.dense_bias[c];
    for (std::size_t j = 0; j < flat; ++j) acc += params_.dense_weight[c * flat + j] * x.values[j];
    rec.logits[c] = acc;
  }
  rec.probs = softmax(rec.logits);
  rec.activations = activations;
  return rec;
}

std::vector<double> ToyConvNet::objective_dlogits(std::span<const double> probs,
                                                  std::span<const double> weights,
                                                  ScoreSpace space) const {
  if (weights.size() != arch_.classes) {
    throw DimensionError(fmt::format("objective has {} weights for {} classes", weights.size(),
                                     arch_.classes));
  }
  std::vector<double> d(weights.begin(), weights.end());
  if (space == ScoreSpace::kProbabilities) {
    // d/dz_j sum_c w_c p_c = p_j (w_j - sum_c w_c p_c)
    double mean = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) mean += weights[c] * probs[c];
    for (std::size_t j = 0; j < probs.size(); ++j) d[j] = probs[j] * (weights[j] - mean);
  }
  return d;
}

void ToyConvNet::backprop(const Tape& tape, std::span<const double> dlogits, NetParameters* grad,
                          std::vector<double>* dinput, FeatureMaps* dtarget) const {
  const std::size_t flat = tape.dense_input.size();
  FeatureMaps dx = tape.dense_input;
  std::fill(dx.values.begin(), dx.values.end(), 0.0);
  for (std::size_t c = 0; c < arch_.classes; ++c) {
    const double g = dlogits[c];
    if (g == 0.0) continue;
    const double* row = &params_.dense_weight[c * flat];
    for (std::size_t j = 0; j < flat; ++j) dx.values[j] += g * row[j];
    if (grad) {
      double* grow = &grad->dense_weight[c * flat];
      for (std::size_t j = 0; j < flat; ++j) grow[j] += g * tape.dense_input.values[j];
      grad->dense_bias[c] += g;
    }
  }

  const bool need_input = dinput != nullptr;
  for (std::size_t s = arch_.stages.size(); s-- > 0;) {
    const auto& st = arch_.stages[s];
    const auto& rect = tape.rect[s];
    FeatureMaps da = st.pool ? pool_backward(dx, rect.height, rect.width) : dx;
    if (s + 1 == arch_.stages.size() && dtarget) {
      *dtarget = da;
      if (!grad && !need_input) return;
    }
    FeatureMaps& dz = da;
    const auto& pre = tape.pre[s];
    for (std::size_t i = 0; i < dz.values.size(); ++i) {
      if (!(pre.values[i] > 0.0)) dz.values[i] = 0.0;
    }
    const bool want_din = need_input || s > 0;
    FeatureMaps din;
    if (want_din) din = make_maps(tape.inputs[s].channels, tape.inputs[s].height, tape.inputs[s].width);
    conv_backward(tape.inputs[s], params_.conv[s].kernel, dz, st.kernel,
                  grad ? &grad->conv[s].kernel : nullptr, grad ? &grad->conv[s].bias : nullptr,
                  want_din ? &din : nullptr);
    if (!want_din) return;
    dx = std::move(din);
  }
  if (dinput) *dinput = maps_to_image_layout(dx);
}

std::vector<double> ToyConvNet::backward_input(const ImageTensor& image,
                                               std::span<const double> weights,
                                               ScoreSpace space) const {
  const Tape tape = run(image);
  const auto dlogits = objective_dlogits(tape.probs, weights, space);
  std::vector<double> dinput;
  backprop(tape, dlogits, nullptr, &dinput, nullptr);
  return dinput;
}

FeatureMaps ToyConvNet::backward_activations(const ImageTensor& image,
                                             std::span<const double> weights,
                                             ScoreSpace space) const {
  if (!has_target_layer()) throw InvalidArgument("model has no target layer");
  const Tape tape = run(image);
  const auto dlogits = objective_dlogits(tape.probs, weights, space);
  FeatureMaps dtarget;
  backprop(tape, dlogits, nullptr, nullptr, &dtarget);
  return dtarget;
}

double ToyConvNet::accumulate_loss_gradient(const ImageTensor& image, std::size_t label,
                                            NetParameters& grad) const {
  if (label >= arch_.classes) throw InvalidArgument(fmt::format("label {} out of range", label));
  const Tape tape = run(image);
  std::vector<double> dlogits = tape.probs;
  dlogits[label] -= 1.0;
  backprop(tape, dlogits, &grad, nullptr, nullptr);
  return -std::log(std::max(tape.probs[label], 1e-300));
}

std::vector<double> ToyConvNet::probabilities(const ImageTensor& image) const {
  return run(image).probs;
}

std::optional<std::vector<double>> ToyConvNet::logits(const ImageTensor& image) const {
  return run(image).logits;
}

std::vector<double> ToyConvNet::objective_gradient(const ImageTensor& image,
                                                   std::span<const double> weights,
                                                   ScoreSpace space) const {
  return backward_input(image, weights, space);
}

// ---------------------------------------------------------------------------
// Training

double accuracy(const ToyConvNet& model, const std::vector<LabeledImage>& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    if (argmax(model.probabilities(ex.image)) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<EpochStats> train(ToyConvNet& model, const std::vector<LabeledImage>& train_set,
                              const std::vector<LabeledImage>& validation_set,
                              const TrainingOptions& options) {
  if (train_set.empty()) throw InvalidArgument("training set is empty");
  if (!(options.learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  if (options.batch == 0) throw InvalidArgument("batch size must be positive");

  Rng rng(options.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EpochStats> history;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double lr = options.learning_rate;
    if (options.anneal) {
      const double phase = static_cast<double>(epoch) / static_cast<double>(options.epochs);
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
    }
    double loss_total = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t end = std::min(order.size(), start + options.batch);
      NetParameters grad = model.zero_like();
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = train_set[order[i]];
        const double loss = model.accumulate_loss_gradient(ex.image, ex.label, grad);
        if (!std::isfinite(loss)) {
          throw TrainingDivergence(static_cast<int>(epoch),
                                   fmt::format("loss is not finite in epoch {}", epoch));
        }
        loss_total += loss;
      }
      const double step = lr / static_cast<double>(end - start);
      if (step != 0.0) {
        auto& params = model.mutable_parameters();
        std::vector<std::vector<double>*> targets;
        params.for_each_tensor([&](std::vector<double>& t) { targets.push_back(&t); });
        std::size_t t = 0;
        grad.for_each_tensor([&](const std::vector<double>& g) {
          auto& p = *targets[t++];
          for (std::size_t j = 0; j < p.size(); ++j) p[j] -= step * g[j];
        });
      }
    }
    for (const auto& ex : train_set) {
      if (argmax(model.probabilities(ex.image)) == ex.label) ++correct;
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.mean_loss = loss_total / static_cast<double>(train_set.size());
    if (!std::isfinite(stats.mean_loss)) {
      throw TrainingDivergence(static_cast<int>(epoch),
                               fmt::format("loss is not finite in epoch {}", epoch));
    }
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!validation_set.empty()) stats.validation_accuracy = accuracy(model, validation_set);
    history.push_back(stats);
  }
  return history;
}

}  // namespace rfxg
