#pragma once

#include <map>
#include <memory>
#include <string>

#include "ticketgan/param_store.hpp"
#include "ticketgan/rng.hpp"

namespace tg {

struct Shape3 {
  int c = 0, h = 0, w = 0;
  int size() const { return c * h * w; }
  bool operator==(const Shape3&) const = default;
};

// Per-layer forward cache, consumed by the matching backward call.
using LayerCache = std::map<std::string, Mat>;

// Batches are row-per-sample matrices; image rows are flat in
// (spatial-major, channel-minor) order: element (c, i, j) sits at
// column c*h*w + i*w + j.
class Layer {
 public:
  Layer(std::string prefix, Shape3 in, Shape3 out)
      : prefix_(std::move(prefix)), in_(in), out_(out) {}
  virtual ~Layer() = default;

  const std::string& prefix() const { return prefix_; }
  Shape3 in_shape() const { return in_; }
  Shape3 out_shape() const { return out_; }

  virtual bool has_params() const { return false; }
  virtual void init(ParamStore& params, Rng& rng) const { (void)params, (void)rng; }

  // `params` is non-const because spectral norm advances its power
  // iteration vector during training forward passes.
  virtual Mat forward(ParamStore& params, const Mat& x, bool training,
                      LayerCache& cache) const = 0;
  virtual Mat backward(const ParamStore& params, const Mat& dy, GradStore& grads,
                       const LayerCache& cache) const = 0;

 protected:
  std::string prefix_;
  Shape3 in_, out_;
};

// y = x W + b, optionally spectrally normalized.
class DenseLayer final : public Layer {
 public:
  DenseLayer(std::string prefix, Shape3 in, int out_dim, bool spectral_norm);
  bool has_params() const override { return true; }
  void init(ParamStore& params, Rng& rng) const override;
  Mat forward(ParamStore& params, const Mat& x, bool training,
              LayerCache& cache) const override;
  Mat backward(const ParamStore& params, const Mat& dy, GradStore& grads,
               const LayerCache& cache) const override;

 private:
  bool sn_;
};

class ReluLayer final : public Layer {
 public:
  ReluLayer(std::string prefix, Shape3 s, double negative_slope = 0.0)
      : Layer(std::move(prefix), s, s), slope_(negative_slope) {}
  Mat forward(ParamStore&, const Mat& x, bool, LayerCache& cache) const override;
  Mat backward(const ParamStore&, const Mat& dy, GradStore&,
               const LayerCache& cache) const override;

 private:
  double slope_;
};

class TanhLayer final : public Layer {
 public:
  TanhLayer(std::string prefix, Shape3 s) : Layer(std::move(prefix), s, s) {}
  Mat forward(ParamStore&, const Mat& x, bool, LayerCache& cache) const override;
  Mat backward(const ParamStore&, const Mat& dy, GradStore&,
               const LayerCache& cache) const override;
};

// Pure shape reinterpretation; the flat row layout is unchanged.
class ReshapeLayer final : public Layer {
 public:
  ReshapeLayer(std::string prefix, Shape3 in, Shape3 out)
      : Layer(std::move(prefix), in, out) {
    if (in.size() != out.size())
      throw std::invalid_argument("reshape changes element count");
  }
  Mat forward(ParamStore&, const Mat& x, bool, LayerCache&) const override {
    return x;
  }
  Mat backward(const ParamStore&, const Mat& dy, GradStore&,
               const LayerCache&) const override {
    return dy;
  }
};

class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(std::string prefix, Shape3 in, int out_channels, int kernel,
              int stride, int pad, bool spectral_norm);
  bool has_params() const override { return true; }
  void init(ParamStore& params, Rng& rng) const override;
  Mat forward(ParamStore& params, const Mat& x, bool training,
              LayerCache& cache) const override;
  Mat backward(const ParamStore& params, const Mat& dy, GradStore& grads,
               const LayerCache& cache) const override;

 private:
  int k_, stride_, pad_;
  bool sn_;
};

class ConvTranspose2dLayer final : public Layer {
 public:
  ConvTranspose2dLayer(std::string prefix, Shape3 in, int out_channels,
                       int kernel, int stride, int pad);
  bool has_params() const override { return true; }
  void init(ParamStore& params, Rng& rng) const override;
  Mat forward(ParamStore& params, const Mat& x, bool training,
              LayerCache& cache) const override;
  Mat backward(const ParamStore& params, const Mat& dy, GradStore& grads,
               const LayerCache& cache) const override;

 private:
  int k_, stride_, pad_;
};

// Orthogonal init via Householder QR with sign-fixed diagonal.
Mat orthogonal_init(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                    double gain = 1.0);

}  // namespace tg
