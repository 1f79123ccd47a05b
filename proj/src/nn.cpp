// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace remix3d::nn {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "[" << c << ", " << d << ", " << h << ", " << w << "]";
    return os.str();
}

Tensor normal_tensor(int c, int d, int h, int w, Rng& rng) {
    Tensor t(c, d, h, w);
    std::normal_distribution<float> n01(0.0f, 1.0f);
    for (float& x : t.v) x = n01(rng);
    return t;
}

size_t LayerSpec::weight_count() const {
    if (kind == LayerKind::upconv2) return size_t(out) * 8 * in;
    return size_t(out) * in * kd * kh * kw;
}

namespace {

// Output slices per GEMM chunk, keeping the column buffer around 8k positions.
int chunk_slices(const Tensor& x) { return std::max(1, 8192 / std::max(1, x.h * x.w)); }

void im2col(const LayerSpec& l, const Tensor& x, int z0, int nzc, FloatVec& col) {
    const int pd = l.kd / 2, ph = l.kh / 2, pw = l.kw / 2;
    const size_t P = size_t(nzc) * x.h * x.w;
    col.resize(size_t(l.in) * l.kd * l.kh * l.kw * P);
    float* row = col.data();
    for (int ci = 0; ci < l.in; ++ci)
        for (int a = 0; a < l.kd; ++a)
            for (int b = 0; b < l.kh; ++b)
                for (int c = 0; c < l.kw; ++c) {
                    const int x_lo = std::max(0, pw - c), x_hi = std::min(x.w, x.w + pw - c);
                    float* dst = row;
                    for (int zz = 0; zz < nzc; ++zz) {
                        const int sz = z0 + zz + a - pd;
                        for (int y = 0; y < x.h; ++y, dst += x.w) {
                            const int sy = y + b - ph;
                            if (sz < 0 || sz >= x.d || sy < 0 || sy >= x.h || x_lo >= x_hi) {
                                std::fill(dst, dst + x.w, 0.0f);
                                continue;
                            }
                            const float* src = &x.v[((size_t(ci) * x.d + sz) * x.h + sy) * x.w];
                            std::fill(dst, dst + x_lo, 0.0f);
                            std::memcpy(dst + x_lo, src + x_lo + c - pw, sizeof(float) * (x_hi - x_lo));
                            std::fill(dst + x_hi, dst + x.w, 0.0f);
                        }
                    }
                    row += P;
                }
}

void col2im_add(const LayerSpec& l, const FloatVec& col, int z0, int nzc, Tensor& dx) {
    const int pd = l.kd / 2, ph = l.kh / 2, pw = l.kw / 2;
    const size_t P = size_t(nzc) * dx.h * dx.w;
    const float* row = col.data();
    for (int ci = 0; ci < l.in; ++ci)
        for (int a = 0; a < l.kd; ++a)
            for (int b = 0; b < l.kh; ++b)
                for (int c = 0; c < l.kw; ++c) {
                    const int x_lo = std::max(0, pw - c), x_hi = std::min(dx.w, dx.w + pw - c);
                    const float* src = row;
                    for (int zz = 0; zz < nzc; ++zz) {
                        const int sz = z0 + zz + a - pd;
                        for (int y = 0; y < dx.h; ++y, src += dx.w) {
                            const int sy = y + b - ph;
                            if (sz < 0 || sz >= dx.d || sy < 0 || sy >= dx.h) continue;
                            float* dst = &dx.v[((size_t(ci) * dx.d + sz) * dx.h + sy) * dx.w];
                            for (int xx = x_lo; xx < x_hi; ++xx) dst[xx + c - pw] += src[xx];
                        }
                    }
                    row += P;
                }
}

void check_input(const LayerSpec& l, const Tensor& x) {
    if (x.c != l.in) {
        std::ostringstream os;
        os << "conv layer expects " << l.in << " input channels, got tensor " << x.shape_string();
        throw PreconditionError(os.str());
    }
}

} // namespace

Tensor conv_forward(const LayerSpec& l, const float* weight, const float* bias, const Tensor& x) {
    check_input(l, x);
    Tensor y(l.out, x.d, x.h, x.w);
    const int K = l.in * l.kd * l.kh * l.kw;
    Eigen::Map<const RowMat> W(weight, l.out, K);
    thread_local FloatVec col;
    const int step = chunk_slices(x);
    for (int z0 = 0; z0 < x.d; z0 += step) {
        const int nzc = std::min(step, x.d - z0);
        const int P = nzc * x.h * x.w;
        im2col(l, x, z0, nzc, col);
        Eigen::Map<const RowMat> C(col.data(), K, P);
        StridedMap Y(y.v.data() + size_t(z0) * x.h * x.w, l.out, P, Eigen::OuterStride<>(Eigen::Index(y.plane())));
        Y.noalias() = W * C;
        if (bias)
            for (int co = 0; co < l.out; ++co) Y.row(co).array() += bias[co];
    }
    return y;
}

void conv_backward(const LayerSpec& l, const float* weight, const Tensor& x, const Tensor& dy, float* d_weight,
                   float* d_bias, Tensor* dx) {
    check_input(l, x);
    const int K = l.in * l.kd * l.kh * l.kw;
    Eigen::Map<const RowMat> W(weight, l.out, K);
    if (dx) *dx = Tensor(l.in, x.d, x.h, x.w);
    thread_local FloatVec col;
    thread_local FloatVec dcol;
    const int step = chunk_slices(x);
    for (int z0 = 0; z0 < x.d; z0 += step) {
        const int nzc = std::min(step, x.d - z0);
        const int P = nzc * x.h * x.w;
        ConstStridedMap DY(dy.v.data() + size_t(z0) * x.h * x.w, l.out, P,
                           Eigen::OuterStride<>(Eigen::Index(dy.plane())));
        if (d_weight) {
            im2col(l, x, z0, nzc, col);
            Eigen::Map<const RowMat> C(col.data(), K, P);
            Eigen::Map<RowMat> DW(d_weight, l.out, K);
            DW.noalias() += DY * C.transpose();
        }
        if (d_bias)
            for (int co = 0; co < l.out; ++co) d_bias[co] += DY.row(co).sum();
        if (dx) {
            dcol.resize(size_t(K) * P);
            Eigen::Map<RowMat> DC(dcol.data(), K, P);
            DC.noalias() = W.transpose() * DY;
            col2im_add(l, dcol, z0, nzc, *dx);
        }
    }
}

Tensor upconv_forward(const LayerSpec& l, const float* weight, const float* bias, const Tensor& x) {
    check_input(l, x);
    const int P = x.d * x.h * x.w;
    Eigen::Map<const RowMat> W(weight, l.out * 8, l.in);
    Eigen::Map<const RowMat> X(x.v.data(), l.in, P);
    const RowMat Y8 = W * X;
    Tensor y(l.out, 2 * x.d, 2 * x.h, 2 * x.w);
    for (int co = 0; co < l.out; ++co)
        for (int tap = 0; tap < 8; ++tap) {
            const int a = tap >> 2, b = (tap >> 1) & 1, c = tap & 1;
            const float* src = Y8.row(co * 8 + tap).data();
            const float bb = bias ? bias[co] : 0.0f;
            for (int z = 0, p = 0; z < x.d; ++z)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx, ++p) y.at(co, 2 * z + a, 2 * yy + b, 2 * xx + c) = src[p] + bb;
        }
    return y;
}

void upconv_backward(const LayerSpec& l, const float* weight, const Tensor& x, const Tensor& dy, float* d_weight,
                     float* d_bias, Tensor* dx) {
    check_input(l, x);
    const int P = x.d * x.h * x.w;
    RowMat DY8(l.out * 8, P);
    for (int co = 0; co < l.out; ++co)
        for (int tap = 0; tap < 8; ++tap) {
            const int a = tap >> 2, b = (tap >> 1) & 1, c = tap & 1;
            float* dst = DY8.row(co * 8 + tap).data();
            for (int z = 0, p = 0; z < x.d; ++z)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx, ++p) dst[p] = dy.at(co, 2 * z + a, 2 * yy + b, 2 * xx + c);
        }
    Eigen::Map<const RowMat> X(x.v.data(), l.in, P);
    Eigen::Map<const RowMat> W(weight, l.out * 8, l.in);
    if (d_weight) {
        Eigen::Map<RowMat> DW(d_weight, l.out * 8, l.in);
        DW.noalias() += DY8 * X.transpose();
    }
    if (d_bias)
        for (int co = 0; co < l.out; ++co) d_bias[co] += DY8.middleRows(co * 8, 8).sum();
    if (dx) {
        *dx = Tensor(l.in, x.d, x.h, x.w);
        Eigen::Map<RowMat> DX(dx->v.data(), l.in, P);
        DX.noalias() = W.transpose() * DY8;
    }
}

ConvNet ConvNet::make(const std::vector<int>& widths, int kernel_d, int kernel_hw, bool upsample_first,
                      OutputActivation out_act, float leaky_slope, Rng& rng, float last_layer_gain) {
    if (widths.size() < 2) throw PreconditionError("ConvNet::make: need at least one layer");
    ConvNet net;
    net.out_act_ = out_act;
    net.slope_ = leaky_slope;
    size_t offset = 0;
    for (size_t n = 0; n + 1 < widths.size(); ++n) {
        LayerSpec l;
        l.kind = (upsample_first && n == 0) ? LayerKind::upconv2 : LayerKind::conv;
        l.in = widths[n];
        l.out = widths[n + 1];
        l.kd = kernel_d;
        l.kh = l.kw = kernel_hw;
        l.w_off = offset;
        offset += l.weight_count();
        l.b_off = offset;
        offset += l.out;
        net.layers_.push_back(l);
    }
    net.params_.assign(offset, 0.0f);
    for (size_t n = 0; n < net.layers_.size(); ++n) {
        const LayerSpec& l = net.layers_[n];
        const bool last = n + 1 == net.layers_.size();
        const double fan_in = l.kind == LayerKind::upconv2 ? l.in : double(l.in) * l.kd * l.kh * l.kw;
        const double gain = last ? 1.0 : 2.0 / (1.0 + double(leaky_slope) * leaky_slope);
        const float bound = float(std::sqrt(3.0 * gain / fan_in)) * (last ? last_layer_gain : 1.0f);
        std::uniform_real_distribution<float> u(-bound, bound);
        for (size_t k = 0; k < l.weight_count(); ++k) net.params_[l.w_off + k] = u(rng);
    }
    return net;
}

ConvNet ConvNet::from_parts(std::vector<LayerSpec> layers, FloatVec params, OutputActivation out_act,
                            float leaky_slope) {
    ConvNet net;
    size_t need = 0;
    for (const LayerSpec& l : layers) need = std::max(need, l.b_off + size_t(l.out));
    if (need != params.size()) throw SchemaError("ConvNet: parameter count does not match the layer table");
    net.layers_ = std::move(layers);
    net.params_ = std::move(params);
    net.out_act_ = out_act;
    net.slope_ = leaky_slope;
    return net;
}

namespace {

Tensor apply_layer(const LayerSpec& l, const FloatVec& p, const Tensor& x, bool with_bias) {
    const float* b = with_bias ? p.data() + l.b_off : nullptr;
    if (l.kind == LayerKind::upconv2) return upconv_forward(l, p.data() + l.w_off, b, x);
    return conv_forward(l, p.data() + l.w_off, b, x);
}

} // namespace

Tensor ConvNet::forward(const Tensor& x, Trace* trace) const {
    if (trace) {
        trace->inputs.clear();
        trace->pre.clear();
    }
    Tensor h = x;
    for (size_t n = 0; n < layers_.size(); ++n) {
        Tensor y = apply_layer(layers_[n], params_, h, true);
        if (trace) {
            trace->inputs.push_back(std::move(h));
            trace->pre.push_back(y);
        }
        const bool last = n + 1 == layers_.size();
        if (!last) {
            for (float& v : y.v)
                if (v < 0.0f) v *= slope_;
        } else if (out_act_ == OutputActivation::tanh) {
            for (float& v : y.v) v = std::tanh(v);
        }
        h = std::move(y);
    }
    return h;
}

void ConvNet::backward_impl(const Trace& primal, const std::vector<Tensor>& layer_inputs, const Tensor& dy,
                            FloatVec* grad, bool with_bias, bool apply_out_act, Tensor* dx) const {
    if (primal.pre.size() != layers_.size() || layer_inputs.size() != layers_.size())
        throw PreconditionError("ConvNet::backward: trace does not match the network");
    Tensor g = dy;
    if (apply_out_act && out_act_ == OutputActivation::tanh) {
        const Tensor& pre = primal.pre.back();
        for (size_t k = 0; k < g.v.size(); ++k) {
            const float t = std::tanh(pre.v[k]);
            g.v[k] *= 1.0f - t * t;
        }
    }
    for (size_t n = layers_.size(); n-- > 0;) {
        const LayerSpec& l = layers_[n];
        if (n + 1 < layers_.size()) {
            const Tensor& pre = primal.pre[n];
            for (size_t k = 0; k < g.v.size(); ++k)
                if (pre.v[k] < 0.0f) g.v[k] *= slope_;
        }
        float* dw = grad ? grad->data() + l.w_off : nullptr;
        float* db = (grad && with_bias) ? grad->data() + l.b_off : nullptr;
        const bool need_dx = n > 0 || dx != nullptr;
        Tensor gx;
        if (l.kind == LayerKind::upconv2)
            upconv_backward(l, params_.data() + l.w_off, layer_inputs[n], g, dw, db, need_dx ? &gx : nullptr);
        else
            conv_backward(l, params_.data() + l.w_off, layer_inputs[n], g, dw, db, need_dx ? &gx : nullptr);
        if (!need_dx) break;
        g = std::move(gx);
    }
    if (dx) *dx = std::move(g);
}

void ConvNet::backward(const Trace& trace, const Tensor& dy, FloatVec* grad, Tensor* dx) const {
    if (grad && grad->size() != params_.size()) throw PreconditionError("ConvNet::backward: gradient size mismatch");
    backward_impl(trace, trace.inputs, dy, grad, true, true, dx);
}

Tensor ConvNet::tangent_forward(const Trace& trace, const Tensor& v, Trace* tangent_trace) const {
    if (out_act_ != OutputActivation::none)
        throw PreconditionError("ConvNet::tangent_forward: only networks without output activation are supported");
    if (tangent_trace) {
        tangent_trace->inputs.clear();
        tangent_trace->pre.clear();
    }
    Tensor t = v;
    for (size_t n = 0; n < layers_.size(); ++n) {
        Tensor y = apply_layer(layers_[n], params_, t, false);
        if (n + 1 < layers_.size()) {
            const Tensor& pre = trace.pre[n];
            for (size_t k = 0; k < y.v.size(); ++k)
                if (pre.v[k] < 0.0f) y.v[k] *= slope_;
        }
        if (tangent_trace) tangent_trace->inputs.push_back(std::move(t));
        t = std::move(y);
    }
    return t;
}

void ConvNet::tangent_backward(const Trace& trace, const Trace& tangent_trace, const Tensor& dy,
                               FloatVec& grad) const {
    if (grad.size() != params_.size()) throw PreconditionError("ConvNet::tangent_backward: gradient size mismatch");
    backward_impl(trace, tangent_trace.inputs, dy, &grad, false, false, nullptr);
}

} // namespace remix3d::nn
