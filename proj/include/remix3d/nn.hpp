// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/common.hpp"

#include <string>
#include <vector>

namespace remix3d::nn {

// Aligned storage keeps vectorized kernels on one code path, so results do not depend on heap addresses.
using FloatVec = std::vector<float, Eigen::aligned_allocator<float>>;

/// Dense float tensor, channel-major: v[((c * d + z) * h + y) * w + x].
/// 2D images use d == 1.
struct Tensor {
    int c = 0, d = 0, h = 0, w = 0;
    FloatVec v;

    Tensor() = default;
    Tensor(int c_, int d_, int h_, int w_, float fill = 0.0f)
        : c(c_), d(d_), h(h_), w(w_), v(size_t(c_) * d_ * h_ * w_, fill) {}

    size_t plane() const { return size_t(d) * h * w; }
    size_t size() const { return v.size(); }
    float& at(int ch, int z, int y, int x) { return v[((size_t(ch) * d + z) * h + y) * w + x]; }
    float at(int ch, int z, int y, int x) const { return v[((size_t(ch) * d + z) * h + y) * w + x]; }
    bool same_shape(const Tensor& o) const { return c == o.c && d == o.d && h == o.h && w == o.w; }
    std::string shape_string() const;

    bool operator==(const Tensor&) const = default;
};

Tensor normal_tensor(int c, int d, int h, int w, Rng& rng);

enum class LayerKind { conv, upconv2 };

/// One layer of a ConvNet. `conv` is a stride-1 convolution with zero "same"
/// padding (odd kernels); `upconv2` is a 2x2x2 stride-2 transposed convolution
/// that doubles every spatial axis (kernel fields ignored).
struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    int in = 0, out = 0;
    int kd = 3, kh = 3, kw = 3;
    size_t w_off = 0, b_off = 0;

    size_t weight_count() const;
};

enum class OutputActivation { none, tanh };

/// Activations recorded by a forward pass.
struct Trace {
    std::vector<Tensor> inputs; // input to layer l
    std::vector<Tensor> pre;    // layer l output before its activation
};

/// Plain feed-forward conv stack: layers with leaky ReLU between them and an
/// optional tanh on the output. All parameters live in one flat vector.
class ConvNet {
public:
    ConvNet() = default;

    /// `widths` lists channel counts: widths[0] input, widths.back() output.
    /// A leading upconv2 layer is added when `upsample_first` is set.
    static ConvNet make(const std::vector<int>& widths, int kernel_d, int kernel_hw, bool upsample_first,
                        OutputActivation out_act, float leaky_slope, Rng& rng, float last_layer_gain = 1.0f);

    Tensor forward(const Tensor& x, Trace* trace = nullptr) const;

    /// Backpropagates `dy` (gradient w.r.t. the network output). Adds parameter
    /// gradients to `grad` (may be null) and writes the input gradient to `dx`
    /// (may be null).
    void backward(const Trace& trace, const Tensor& dy, FloatVec* grad, Tensor* dx) const;

    /// Jacobian-vector product at the traced point: the network linearized
    /// around `trace` (fixed leaky masks, no biases) applied to `v`. Requires
    /// OutputActivation::none.
    Tensor tangent_forward(const Trace& trace, const Tensor& v, Trace* tangent_trace) const;

    /// Parameter gradient of <dy, tangent_forward(trace, v)>, accumulated into
    /// `grad` (weights only; biases do not enter the linearization).
    void tangent_backward(const Trace& trace, const Trace& tangent_trace, const Tensor& dy,
                          FloatVec& grad) const;

    const std::vector<LayerSpec>& layers() const { return layers_; }
    FloatVec& params() { return params_; }
    const FloatVec& params() const { return params_; }
    float leaky_slope() const { return slope_; }
    OutputActivation output_activation() const { return out_act_; }

    /// Rebuilds a network from its layer table and parameters (checkpoint load).
    static ConvNet from_parts(std::vector<LayerSpec> layers, FloatVec params, OutputActivation out_act,
                              float leaky_slope);

private:
    void backward_impl(const Trace& primal, const std::vector<Tensor>& layer_inputs, const Tensor& dy,
                       FloatVec* grad, bool with_bias, bool apply_out_act, Tensor* dx) const;

    std::vector<LayerSpec> layers_;
    FloatVec params_;
    OutputActivation out_act_ = OutputActivation::none;
    float slope_ = 0.2f;
};

// Layer primitives (exposed for tests).
Tensor conv_forward(const LayerSpec& l, const float* weight, const float* bias, const Tensor& x);
void conv_backward(const LayerSpec& l, const float* weight, const Tensor& x, const Tensor& dy, float* d_weight,
                   float* d_bias, Tensor* dx);
Tensor upconv_forward(const LayerSpec& l, const float* weight, const float* bias, const Tensor& x);
void upconv_backward(const LayerSpec& l, const float* weight, const Tensor& x, const Tensor& dy, float* d_weight,
                     float* d_bias, Tensor* dx);

} // namespace remix3d::nn
