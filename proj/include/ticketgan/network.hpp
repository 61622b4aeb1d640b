#pragma once

#include <memory>
#include <vector>

#include "ticketgan/layers.hpp"

namespace tg {

using Caches = std::vector<LayerCache>;

// Ordered stack of layers sharing one ParamStore. Split points are
// expressed in *parameterized-layer* counts: split index s means part 1
// owns parameterized layers [1..s] plus any trailing activations before
// parameterized layer s+1.
class Network {
 public:
  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  void add(std::unique_ptr<Layer> layer) {
    if (layer->has_params()) param_layer_idx_.push_back(layers_.size());
    layers_.push_back(std::move(layer));
  }

  void init(Rng& rng) {
    for (const auto& l : layers_)
      if (l->has_params()) l->init(params_, rng);
  }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Shape3 input_shape() const { return layers_.front()->in_shape(); }
  Shape3 output_shape() const { return layers_.back()->out_shape(); }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t param_layer_count() const { return param_layer_idx_.size(); }

  // internal layer index where part 2 begins for a given split
  std::size_t split_boundary(int split) const {
    const int p = static_cast<int>(param_layer_idx_.size());
    if (split < 1 || split > p - 1)
      throw std::invalid_argument("split index out of range");
    return param_layer_idx_[static_cast<std::size_t>(split)];
  }

  Shape3 shape_at_boundary(std::size_t boundary) const {
    return boundary == 0 ? input_shape() : layers_[boundary - 1]->out_shape();
  }

  Mat forward_range(std::size_t from, std::size_t to, const Mat& x,
                    bool training, Caches* caches) {
    Mat h = x;
    for (std::size_t i = from; i < to; ++i) {
      LayerCache local;
      LayerCache& c = caches ? (*caches)[i] : local;
      c.clear();
      h = layers_[i]->forward(params_, h, training, c);
    }
    return h;
  }

  // returns dL/dx; parameter gradients accumulate into `grads`
  Mat backward_range(std::size_t from, std::size_t to, const Mat& dy,
                     GradStore& grads, const Caches& caches) const {
    Mat d = dy;
    for (std::size_t i = to; i-- > from;)
      d = layers_[i]->backward(params_, d, grads, caches[i]);
    return d;
  }

  Mat forward(const Mat& x, bool training = false, Caches* caches = nullptr) {
    if (caches) caches->resize(layers_.size());
    return forward_range(0, layers_.size(), x, training, caches);
  }

  Caches make_caches() const { return Caches(layers_.size()); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::size_t> param_layer_idx_;
  ParamStore params_;
};

// features = part1(input); output = part2(features + delta)
struct SplitForward {
  Mat features;
  Mat output;
};

inline SplitForward forward_split(Network& net, int split, const Mat& input,
                                  const Mat* delta, bool training,
                                  Caches* caches) {
  const std::size_t b = net.split_boundary(split);
  if (caches) caches->resize(net.layer_count());
  SplitForward r;
  r.features = net.forward_range(0, b, input, training, caches);
  Mat h = r.features;
  if (delta) {
    if (delta->rows() != h.rows() || delta->cols() != h.cols())
      throw std::invalid_argument("delta shape does not match split features");
    h += *delta;
  }
  r.output = net.forward_range(b, net.layer_count(), h, training, caches);
  return r;
}

}  // namespace tg
