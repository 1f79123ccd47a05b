// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/common.hpp"

namespace remix3d {

/// Pinhole camera. `rotation` and `translation` map world points into camera
/// space (x_cam = R * x_world + t); camera space is x right, y down, z forward.
struct Camera {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double focal = 1.0;
    Vec2 principal_point = Vec2::Zero();
    int width = 1;
    int height = 1;

    Vec3 center() const { return -rotation.transpose() * translation; }
    Vec3 forward() const { return rotation.row(2).transpose(); }

    /// Throws PreconditionError if the invariants do not hold.
    void validate() const;

    bool operator==(const Camera& o) const {
        return rotation == o.rotation && translation == o.translation && focal == o.focal &&
               principal_point == o.principal_point && width == o.width && height == o.height;
    }
};

/// Builds a camera at `eye` looking at `target`. When the viewing direction is
/// (anti)parallel to `up` within 1e-4 rad the x axis is used as the up vector.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height);

} // namespace remix3d
