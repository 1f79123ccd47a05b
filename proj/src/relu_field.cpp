// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/relu_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace remix3d {

FeatureGrid::FeatureGrid(Int3 d, const Vec3& lo, const Vec3& hi, const Raw4& fill)
    : nx(d[0]), ny(d[1]), nz(d[2]), aabb_min(lo), aabb_max(hi) {
    if (nx < 2 || ny < 2 || nz < 2) throw PreconditionError("FeatureGrid: every axis needs at least 2 nodes");
    data.resize(kChannels * voxel_count());
    for (int c = 0; c < kChannels; ++c)
        std::fill(data.begin() + c * voxel_count(), data.begin() + (c + 1) * voxel_count(), fill[c]);
}

Vec3 FeatureGrid::spacing() const {
    return (aabb_max - aabb_min).cwiseQuotient(Vec3(nx - 1, ny - 1, nz - 1));
}

Vec3 FeatureGrid::node_position(int i, int j, int k) const {
    return aabb_min + spacing().cwiseProduct(Vec3(i, j, k));
}

void FeatureGrid::validate() const {
    if (nx < 2 || ny < 2 || nz < 2) throw PreconditionError("FeatureGrid: every axis needs at least 2 nodes");
    if (!(aabb_min.array() < aabb_max.array()).all()) throw PreconditionError("FeatureGrid: empty AABB");
    if (data.size() != kChannels * voxel_count()) throw PreconditionError("FeatureGrid: data size mismatch");
    for (size_t n = 0; n < data.size(); ++n) {
        if (!std::isfinite(data[n])) {
            std::ostringstream os;
            os << "FeatureGrid: non-finite raw value at flat index " << n;
            throw PreconditionError(os.str());
        }
    }
}

namespace {

// Splits a continuous index coordinate into a base cell and fraction.
inline void locate(double u, int n, int& base, double& frac) {
    base = std::clamp(int(std::floor(u)), 0, n - 2);
    frac = u - base;
}

} // namespace

TrilerpStencil trilerp_stencil(const FeatureGrid& grid, const Vec3& p) {
    TrilerpStencil s;
    if ((p.array() < grid.aabb_min.array()).any() || (p.array() > grid.aabb_max.array()).any()) return s;
    s.inside = true;

    const Vec3 u = (p - grid.aabb_min).cwiseQuotient(grid.spacing());
    int i0, j0, k0;
    double fx, fy, fz;
    locate(u.x(), grid.nx, i0, fx);
    locate(u.y(), grid.ny, j0, fy);
    locate(u.z(), grid.nz, k0, fz);

    const size_t sx = 1, sy = size_t(grid.nx), sz = size_t(grid.nx) * grid.ny;
    const size_t base = grid.index(0, i0, j0, k0);
    for (int corner = 0; corner < 8; ++corner) {
        const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
        s.node[corner] = base + dx * sx + dy * sy + dz * sz;
        s.weight[corner] = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
    }
    return s;
}

Raw4 trilerp(const FeatureGrid& grid, const Vec3& point) {
    const TrilerpStencil s = trilerp_stencil(grid, point);
    if (!s.inside) return {-1.0, 0.0, 0.0, 0.0};
    const size_t plane = grid.voxel_count();
    Raw4 out{0.0, 0.0, 0.0, 0.0};
    for (int corner = 0; corner < 8; ++corner)
        for (int c = 0; c < FeatureGrid::kChannels; ++c)
            out[c] += s.weight[corner] * grid.data[s.node[corner] + c * plane];
    return out;
}

FieldSample field_eval(const FeatureGrid& grid, const Vec3& point) {
    const Raw4 raw = trilerp(grid, point);
    FieldSample out;
    out.density = activate(raw[0]);
    out.rgb = Vec3(activate(raw[1]), activate(raw[2]), activate(raw[3]));
    return out;
}

namespace {

// Linear resampling weights along one axis: new node m of 2n nodes sits at old
// index coordinate m * (n - 1) / (2n - 1).
struct AxisTaps {
    std::vector<int> base;
    std::vector<double> frac;
};

AxisTaps axis_taps(int n) {
    AxisTaps t;
    const int m = 2 * n;
    t.base.resize(m);
    t.frac.resize(m);
    for (int q = 0; q < m; ++q) {
        // exact rational position (q * (n-1)) / (m-1)
        const long num = long(q) * (n - 1);
        const long den = m - 1;
        int b = int(num / den);
        double f = double(num % den) / double(den);
        if (b >= n - 1) {
            b = n - 2;
            f = 1.0;
        }
        t.base[q] = b;
        t.frac[q] = f;
    }
    return t;
}

} // namespace

FeatureGrid upsample2x(const FeatureGrid& g) {
    FeatureGrid out({2 * g.nx, 2 * g.ny, 2 * g.nz}, g.aabb_min, g.aabb_max);
    const AxisTaps tx = axis_taps(g.nx), ty = axis_taps(g.ny), tz = axis_taps(g.nz);
    for (int c = 0; c < FeatureGrid::kChannels; ++c)
        for (int k = 0; k < out.nz; ++k)
            for (int j = 0; j < out.ny; ++j)
                for (int i = 0; i < out.nx; ++i) {
                    const int i0 = tx.base[i], j0 = ty.base[j], k0 = tz.base[k];
                    const double fx = tx.frac[i], fy = ty.frac[j], fz = tz.frac[k];
                    double v = 0.0;
                    for (int corner = 0; corner < 8; ++corner) {
                        const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
                        const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
                        if (w != 0.0) v += w * g.at(c, i0 + dx, j0 + dy, k0 + dz);
                    }
                    out.at(c, i, j, k) = v;
                }
    return out;
}

FeatureGrid downsample2x(const FeatureGrid& g) {
    if (g.nx % 2 || g.ny % 2 || g.nz % 2 || g.nx < 4 || g.ny < 4 || g.nz < 4)
        throw PreconditionError("downsample2x: dimensions must be even and >= 4");
    FeatureGrid out({g.nx / 2, g.ny / 2, g.nz / 2}, g.aabb_min, g.aabb_max);
    for (int c = 0; c < FeatureGrid::kChannels; ++c)
        for (int k = 0; k < out.nz; ++k)
            for (int j = 0; j < out.ny; ++j)
                for (int i = 0; i < out.nx; ++i) {
                    double v = 0.0;
                    for (int corner = 0; corner < 8; ++corner)
                        v += g.at(c, 2 * i + (corner & 1), 2 * j + ((corner >> 1) & 1), 2 * k + ((corner >> 2) & 1));
                    out.at(c, i, j, k) = v / 8.0;
                }
    return out;
}

GridPatch extract_patch_3d(const FeatureGrid& grid, Int3 corner, Int3 size) {
    const Int3 dims = grid.dims();
    for (int a = 0; a < 3; ++a) {
        if (size[a] <= 0) throw PreconditionError("extract_patch_3d: patch size must be positive");
        if (corner[a] < 0 || corner[a] + size[a] > dims[a]) {
            std::ostringstream os;
            os << "extract_patch_3d: patch [" << corner[a] << ", " << corner[a] + size[a] << ") exceeds axis " << a
               << " of extent " << dims[a];
            throw PreconditionError(os.str());
        }
    }
    GridPatch p;
    p.size = size;
    p.data.resize(size_t(FeatureGrid::kChannels) * size[0] * size[1] * size[2]);
    size_t n = 0;
    for (int c = 0; c < FeatureGrid::kChannels; ++c)
        for (int k = 0; k < size[2]; ++k)
            for (int j = 0; j < size[1]; ++j) {
                const double* row = &grid.data[grid.index(c, corner[0], corner[1] + j, corner[2] + k)];
                std::copy(row, row + size[0], p.data.begin() + n);
                n += size[0];
            }
    return p;
}

GridPatch random_patch_3d(const FeatureGrid& grid, Int3 size, Rng& rng, Int3* corner_out) {
    const Int3 dims = grid.dims();
    Int3 corner{};
    for (int a = 0; a < 3; ++a) {
        if (size[a] <= 0 || size[a] > dims[a]) throw PreconditionError("random_patch_3d: invalid patch size");
        corner[a] = std::uniform_int_distribution<int>(0, dims[a] - size[a])(rng);
    }
    if (corner_out) *corner_out = corner;
    return extract_patch_3d(grid, corner, size);
}

} // namespace remix3d
