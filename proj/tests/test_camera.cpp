#include <cmath>
#include <string>

#include <doctest.h>

#include "helpers.hpp"
#include "vtm/camera.hpp"
#include "vtm/errors.hpp"

using namespace vtm;

TEST_SUITE("camera") {

TEST_CASE("identity camera keeps world points unchanged") {
    Camera cam;
    const Vec3 p(0.3, -1.2, 4.0);
    CHECK((cam.to_camera_space(p) - p).norm() == 0.0);
}

TEST_CASE("pure translation shifts the origin") {
    Camera cam;
    cam.translation = Vec3(0.0, 0.0, 5.0);
    CHECK((cam.to_camera_space(Vec3::Zero()) - Vec3(0.0, 0.0, 5.0)).norm() ==
          0.0);
}

TEST_CASE("rigid transforms preserve distances") {
    test::Rng rng(401);
    for (int i = 0; i < 100; ++i) {
        const Camera cam = test::random_camera(rng);
        const Vec3 a = test::random_vec(rng, -3.0, 3.0);
        const Vec3 b = test::random_vec(rng, -3.0, 3.0);
        const double before = (a - b).norm();
        const double after =
            (cam.to_camera_space(a) - cam.to_camera_space(b)).norm();
        CHECK(std::abs(before - after) < 1e-12);
    }
}

TEST_CASE("points on the principal ray project to the principal point") {
    Camera cam;
    cam.fx = 1234.0;
    cam.fy = 987.0;
    cam.cx = 321.0;
    cam.cy = 123.0;
    for (double z : {0.5, 1.0, 7.5}) {
        const Vec2 uv = cam.project(Vec3(0.0, 0.0, z));
        CHECK(uv.x() == 321.0);
        CHECK(uv.y() == 123.0);
    }
}

TEST_CASE("projection closed form") {
    Camera cam;
    cam.fx = 1000.0;
    cam.fy = 1000.0;
    cam.cx = 500.0;
    cam.cy = 500.0;
    const Vec2 uv = cam.project(Vec3(0.1, 0.2, 2.0));
    CHECK(std::abs(uv.x() - 550.0) < 1e-12);
    CHECK(std::abs(uv.y() - 600.0) < 1e-12);
}

TEST_CASE("projection is invariant under positive ray scaling") {
    test::Rng rng(402);
    Camera cam;
    for (int i = 0; i < 100; ++i) {
        Vec3 p = test::random_vec(rng, -2.0, 2.0);
        p.z() = rng.uniform(0.5, 4.0);
        const double k = rng.uniform(0.1, 10.0);
        const Vec2 a = cam.project(p);
        const Vec2 b = cam.project(k * p);
        CHECK((a - b).norm() < 1e-9);
    }
}

TEST_CASE("points at or behind the image plane are rejected") {
    Camera cam;
    CHECK_THROWS_AS(cam.project(Vec3(0.0, 0.0, 0.0)), BehindCamera);
    CHECK_THROWS_AS(cam.project(Vec3(0.1, 0.1, 1e-7)), BehindCamera);
    CHECK_THROWS_AS(cam.project(Vec3(0.1, 0.1, -1.0)), BehindCamera);
}

TEST_CASE("principal point recovers onto the optical axis") {
    Camera cam;
    cam.cx = 480.0;
    cam.cy = 270.0;
    const Vec3 p = cam.recover_root_translation(Vec2(480.0, 270.0), 3.0);
    CHECK((p - Vec3(0.0, 0.0, 3.0)).norm() == 0.0);
}

TEST_CASE("recover inverts project for positive depths") {
    test::Rng rng(403);
    for (int i = 0; i < 1000; ++i) {
        const Camera cam = test::random_camera(rng);
        Vec3 p = test::random_vec(rng, -2.0, 2.0);
        p.z() = rng.uniform(0.2, 8.0);
        const Vec2 uv = cam.project(p);
        const Vec3 back = cam.recover_root_translation(uv, p.z());
        CHECK((back - p).norm() < 1e-9);
        // And the recovered point sits exactly on the measured pixel ray.
        CHECK((cam.project(back) - uv).norm() < 1e-9);
    }
}

TEST_CASE("non-positive depths are rejected") {
    Camera cam;
    CHECK_THROWS_AS(cam.recover_root_translation(Vec2(500.0, 500.0), 0.0),
                    NonPositiveDepth);
    CHECK_THROWS_AS(cam.recover_root_translation(Vec2(500.0, 500.0), -2.0),
                    NonPositiveDepth);
}

TEST_CASE("camera file round trips bitwise") {
    test::Rng rng(404);
    for (int i = 0; i < 20; ++i) {
        const Camera cam = test::random_camera(rng);
        const Camera back = parse_camera_file(write_camera_file(cam));
        CHECK(back.name == cam.name);
        CHECK(back.fx == cam.fx);
        CHECK(back.fy == cam.fy);
        CHECK(back.cx == cam.cx);
        CHECK(back.cy == cam.cy);
        CHECK(back.width == cam.width);
        CHECK(back.height == cam.height);
        // %.17g reproduces the exact doubles; the constructor renormalizes,
        // which may move the quaternion by at most an ulp.
        CHECK(geodesic_angle(back.rotation, cam.rotation) < 1e-15);
        CHECK(back.translation.x() == cam.translation.x());
        CHECK(back.translation.y() == cam.translation.y());
        CHECK(back.translation.z() == cam.translation.z());
    }
}

TEST_CASE("missing image size defaults to twice the principal point") {
    const Camera cam = parse_camera_file(
        "# vtm camera v1\n"
        "name = c\n"
        "fx = 1000\nfy = 1100\ncx = 480\ncy = 270\n"
        "rotation = 1 0 0 0\n"
        "translation = 0 0 0\n");
    CHECK(cam.width == 960.0);
    CHECK(cam.height == 540.0);
}

TEST_CASE("camera files without the version header are rejected") {
    CHECK_THROWS_AS(parse_camera_file("fx = 100\nfy = 100\n"), SyntaxError);
}

TEST_CASE("camera parse errors carry line numbers") {
    try {
        parse_camera_file("# vtm camera v1\nfx = 100\nbogus line\n");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(e.code() == "E_SYNTAX");
    }
}

TEST_CASE("non-positive focal lengths are rejected") {
    CHECK_THROWS_AS(parse_camera_file("# vtm camera v1\nfx = -3\n"),
                    ConfigError);
}

} // TEST_SUITE
