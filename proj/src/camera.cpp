// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/camera.hpp"

#include <cmath>
#include <sstream>

namespace remix3d {

void Camera::validate() const {
    if (!rotation.allFinite() || !translation.allFinite())
        throw PreconditionError("camera: non-finite extrinsics");
    const double err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (err > 1e-6) {
        std::ostringstream os;
        os << "camera: rotation is not orthonormal (max |R^T R - I| = " << err << ")";
        throw PreconditionError(os.str());
    }
    if (!(focal > 0.0)) throw PreconditionError("camera: focal must be positive");
    if (width <= 0 || height <= 0) throw PreconditionError("camera: image size must be positive");
    if (!(principal_point.x() >= 0.0 && principal_point.x() <= width && principal_point.y() >= 0.0 &&
          principal_point.y() <= height))
        throw PreconditionError("camera: principal point outside the image");
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height) {
    const Vec3 fwd = (target - eye).normalized();
    Vec3 up_vec = up.normalized();
    // angle between fwd and up below 1e-4 rad
    if (fwd.cross(up_vec).norm() < std::sin(1e-4)) up_vec = Vec3::UnitX();
    const Vec3 right = fwd.cross(up_vec).normalized();
    const Vec3 down = fwd.cross(right);

    Camera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = fwd.transpose();
    cam.translation = -cam.rotation * eye;
    cam.focal = focal;
    cam.width = width;
    cam.height = height;
    cam.principal_point = Vec2(0.5 * width, 0.5 * height);
    return cam;
}

} // namespace remix3d
