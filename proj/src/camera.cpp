#include "vtm/camera.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vtm/errors.hpp"

namespace vtm {

Vec2 Camera::project(const Vec3& p) const {
    if (p.z() <= 1e-6) {
        throw BehindCamera("point at camera-space z = " + std::to_string(p.z()));
    }
    return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

Vec3 Camera::recover_root_translation(const Vec2& root_uv, double root_z) const {
    if (root_z <= 0.0) {
        throw NonPositiveDepth("root depth " + std::to_string(root_z) +
                               " must be positive");
    }
    return Vec3((root_uv.x() - cx) * root_z / fx,
                (root_uv.y() - cy) * root_z / fy,
                root_z);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Camera parse_camera_file(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Camera cam;
    bool saw_width = false, saw_height = false;
    int line_no = 0;
    bool header_ok = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("# vtm camera v1", 0) == 0) {
                header_ok = true;
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw SyntaxError("camera file line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::istringstream vs(value);
        auto num = [&](double& target) {
            if (!(vs >> target)) {
                throw SyntaxError("camera file line " + std::to_string(line_no) +
                                  ": bad number for '" + key + "'");
            }
        };
        if (key == "name") {
            cam.name = value;
        } else if (key == "fx") {
            num(cam.fx);
        } else if (key == "fy") {
            num(cam.fy);
        } else if (key == "cx") {
            num(cam.cx);
        } else if (key == "cy") {
            num(cam.cy);
        } else if (key == "width") {
            num(cam.width);
            saw_width = true;
        } else if (key == "height") {
            num(cam.height);
            saw_height = true;
        } else if (key == "rotation") {
            double w, x, y, z;
            if (!(vs >> w >> x >> y >> z)) {
                throw SyntaxError("camera file line " + std::to_string(line_no) +
                                  ": rotation needs 'w x y z'");
            }
            cam.rotation = Rotation(w, x, y, z);
        } else if (key == "translation") {
            double x, y, z;
            if (!(vs >> x >> y >> z)) {
                throw SyntaxError("camera file line " + std::to_string(line_no) +
                                  ": translation needs 'x y z'");
            }
            cam.translation = Vec3(x, y, z);
        } else {
            throw SyntaxError("camera file line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        }
    }
    if (!header_ok) {
        throw SyntaxError("camera file: missing '# vtm camera v1' header");
    }
    if (cam.fx <= 0.0 || cam.fy <= 0.0) {
        throw ConfigError("camera focal lengths must be positive");
    }
    if (!saw_width) {
        cam.width = 2.0 * cam.cx;
    }
    if (!saw_height) {
        cam.height = 2.0 * cam.cy;
    }
    return cam;
}

std::string write_camera_file(const Camera& cam) {
    char buf[512];
    std::string out = "# vtm camera v1\n";
    out += "name = " + cam.name + "\n";
    std::snprintf(buf, sizeof(buf),
                  "fx = %.17g\nfy = %.17g\ncx = %.17g\ncy = %.17g\n"
                  "width = %.17g\nheight = %.17g\n",
                  cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height);
    out += buf;
    std::snprintf(buf, sizeof(buf), "rotation = %.17g %.17g %.17g %.17g\n",
                  cam.rotation.w(), cam.rotation.x(), cam.rotation.y(),
                  cam.rotation.z());
    out += buf;
    std::snprintf(buf, sizeof(buf), "translation = %.17g %.17g %.17g\n",
                  cam.translation.x(), cam.translation.y(), cam.translation.z());
    out += buf;
    return out;
}

Camera load_camera(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open camera file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_camera_file(ss.str());
}

void save_camera(const Camera& cam, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write camera file '" + path + "'");
    }
    out << write_camera_file(cam);
}

} // namespace vtm
