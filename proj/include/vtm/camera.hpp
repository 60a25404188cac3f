#pragma once

#include <string>

#include "vtm/rotation.hpp"

namespace vtm {

// Pinhole camera without distortion. rotation/translation map world points
// into the camera frame (p_cam = R * p_world + t); the camera looks down +z.
// width/height are the image size in pixels used to normalize keypoints;
// when a camera file omits them they default to 2*cx and 2*cy.
struct Camera {
    std::string name = "camera";
    double fx = 1000.0;
    double fy = 1000.0;
    double cx = 500.0;
    double cy = 500.0;
    double width = 1000.0;
    double height = 1000.0;
    Rotation rotation;            // world -> camera
    Vec3 translation{0.0, 0.0, 0.0};

    Vec3 to_camera_space(const Vec3& p_world) const {
        return rotation.rotate(p_world) + translation;
    }

    // Throws BehindCamera when p_cam.z <= 1e-6.
    Vec2 project(const Vec3& p_cam) const;

    // Inverse of project at a known depth: x = (u-cx) * z / fx, y likewise.
    // Throws NonPositiveDepth when root_z <= 0.
    Vec3 recover_root_translation(const Vec2& root_uv, double root_z) const;
};

// Key-value camera description:
//   # vtm camera v1
//   name = cam0
//   fx = 1000 ... cy = 500
//   width = 1000        (optional)
//   height = 1000       (optional)
//   rotation = w x y z
//   translation = x y z
Camera parse_camera_file(const std::string& text);
std::string write_camera_file(const Camera& cam);
Camera load_camera(const std::string& path);
void save_camera(const Camera& cam, const std::string& path);

} // namespace vtm
