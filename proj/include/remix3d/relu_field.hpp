// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/common.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace remix3d {

using Int3 = std::array<int, 3>;
using Raw4 = std::array<double, 4>;

/// Dense voxel grid of raw features. Channel 0 is raw density, channels 1-3 raw
/// RGB. Nodes sit on cell corners: node 0 at aabb_min, node n-1 at aabb_max.
///
/// Storage is channel-planar with x fastest:
///   data[((c * nz + k) * ny + j) * nx + i]
/// which is also the layout of the RFG1 file payload and of the conv tensors.
struct FeatureGrid {
    static constexpr int kChannels = 4;

    int nx = 0, ny = 0, nz = 0;
    Vec3 aabb_min = Vec3::Constant(-1.0);
    Vec3 aabb_max = Vec3::Constant(1.0);
    std::vector<double> data;

    FeatureGrid() = default;
    FeatureGrid(Int3 dims, const Vec3& lo, const Vec3& hi, const Raw4& fill = {-1.0, 0.0, 0.0, 0.0});

    Int3 dims() const { return {nx, ny, nz}; }
    size_t voxel_count() const { return size_t(nx) * ny * nz; }
    size_t index(int c, int i, int j, int k) const { return ((size_t(c) * nz + k) * ny + j) * nx + i; }
    double& at(int c, int i, int j, int k) { return data[index(c, i, j, k)]; }
    double at(int c, int i, int j, int k) const { return data[index(c, i, j, k)]; }

    Vec3 spacing() const;
    Vec3 node_position(int i, int j, int k) const;
    Vec3 center() const { return 0.5 * (aabb_min + aabb_max); }

    /// Throws PreconditionError on broken invariants (dims, AABB, NaN/Inf).
    void validate() const;

    bool operator==(const FeatureGrid&) const = default;
};

/// Activated field value at a point.
struct FieldSample {
    double density = 0.0;
    Vec3 rgb = Vec3::Zero();
};

/// The eight nodes and weights used to interpolate at one point. `inside` is
/// false for points outside the AABB, in which case the other fields are unset.
struct TrilerpStencil {
    bool inside = false;
    std::array<size_t, 8> node{};   // channel-0 index of each corner
    std::array<double, 8> weight{};
};

TrilerpStencil trilerp_stencil(const FeatureGrid& grid, const Vec3& point);

/// Raw interpolated features. Outside the AABB returns (-1, 0, 0, 0).
Raw4 trilerp(const FeatureGrid& grid, const Vec3& point);

/// clamp(x, 0, 1); the activation used for every channel.
inline double activate(double raw) { return raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw); }

/// Interpolate first, then activate.
FieldSample field_eval(const FeatureGrid& grid, const Vec3& point);

/// Doubles the node count per axis, sampling the trilinear field of `grid` at
/// the new node positions. The AABB is unchanged.
FeatureGrid upsample2x(const FeatureGrid& grid);

/// 2x average pooling of raw features (each output node is the mean of a 2x2x2
/// block). Dimensions must be even and at least 4.
FeatureGrid downsample2x(const FeatureGrid& grid);

/// Raw sub-block of a grid, same channel-planar layout as FeatureGrid.
struct GridPatch {
    Int3 size{};
    std::vector<double> data; // [c][k][j][i]

    double at(int c, int i, int j, int k) const {
        return data[((size_t(c) * size[2] + k) * size[1] + j) * size[0] + i];
    }
};

GridPatch extract_patch_3d(const FeatureGrid& grid, Int3 corner, Int3 size);

/// Uniform corner over all valid positions. The chosen corner is written to
/// `corner_out` when given.
GridPatch random_patch_3d(const FeatureGrid& grid, Int3 size, Rng& rng, Int3* corner_out = nullptr);

} // namespace remix3d
