// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace remix3d {

/// Adam on a flat parameter vector.
template <class T>
class Adam {
public:
    Adam() = default;
    Adam(size_t n, double lr, double beta1, double beta2, double eps = 1e-8)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

    template <class Vec>
    void step(Vec& params, const Vec& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, t_), c2 = 1.0 - std::pow(b2_, t_);
        for (size_t n = 0; n < params.size(); ++n) {
            const double g = grad[n];
            m_[n] = b1_ * m_[n] + (1.0 - b1_) * g;
            v_[n] = b2_ * v_[n] + (1.0 - b2_) * g * g;
            params[n] -= T(lr_ * (m_[n] / c1) / (std::sqrt(v_[n] / c2) + eps_));
        }
    }

    double learning_rate() const { return lr_; }
    long steps() const { return t_; }

private:
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace remix3d
