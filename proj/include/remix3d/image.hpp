// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/common.hpp"

#include <vector>

namespace remix3d {

/// Linear RGB image, row-major, channels interleaved.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> rgb;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), rgb(size_t(w) * h * 3, fill) {}

    double& at(int x, int y, int c) { return rgb[(size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return rgb[(size_t(y) * width + x) * 3 + c]; }

    bool operator==(const Image&) const = default;
};

} // namespace remix3d
