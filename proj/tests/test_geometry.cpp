#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"
#include "asp/geom/inertia.hpp"
#include "asp/geom/mesh.hpp"
#include "asp/geom/point_cloud.hpp"
#include "asp/geom/pose.hpp"
#include "asp/geom/queries.hpp"

using namespace asp;
using namespace asp::geom;

namespace {

Pose translated(double x, double y, double z) {
    Pose p;
    p.t = Vec3(x, y, z);
    return p;
}

Pose rotated(const Vec3& axis, double angle) {
    Pose p;
    p.q = Quat(Eigen::AngleAxisd(angle, axis.normalized()));
    return p;
}

} // namespace

TEST_CASE("pose axis-angle round trip stays canonical") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Pose p = Pose::from_axis_angle(Vec3::Zero(), axis * angle);
        const Vec3 aa = p.axis_angle();
        CHECK(aa.norm() <= M_PI + 1e-12);
        const Pose q = Pose::from_axis_angle(Vec3::Zero(), aa);
        CHECK(p.rotation_angle_to(q) < 1e-9);
    }
}

TEST_CASE("pose JSON serialization round trips") {
    const Pose p = Pose::from_axis_angle(Vec3(0.1, -0.2, 0.3), Vec3(0.4, 0.5, -0.6));
    const auto j = pose_to_json(p);
    const Pose q = pose_from_json(j);
    CHECK(p.approx_equal(q, 1e-12));
    CHECK(j.contains("t"));
    CHECK(j.contains("aa"));
}

TEST_CASE("pose compose and inverse") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const Pose a = Pose::from_axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()),
                                             Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.3);
        const Pose b = Pose::from_axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()),
                                             Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.3);
        const Vec3 p(rng.normal(), rng.normal(), rng.normal());
        CHECK((a.compose(b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
        CHECK((a.compose(a.inverse()).apply(p) - p).norm() < 1e-12);
    }
}

TEST_CASE("mesh validation rejects bad input") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_AS(TriMesh(v, {{0, 1, 5}}), InvalidInputError);
    CHECK_THROWS_AS(TriMesh(v, {{0, 1, 1}}), InvalidInputError);
    std::vector<Vec3> collinear = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK_THROWS_AS(TriMesh(collinear, {{0, 1, 2}}), InvalidInputError);
    CHECK_NOTHROW(TriMesh(v, {{0, 1, 2}}));
}

TEST_CASE("unit cube point samples stay on the surface with axis normals") {
    const TriMesh cube = make_box(1, 1, 1);
    const PointCloud cloud = sample_point_cloud(cube, Pose::identity(), 8, 0);
    REQUIRE(cloud.size() == 8);
    for (int i = 0; i < 8; ++i) {
        const Vec3 p = cloud.points.row(i);
        CHECK(p.cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
        const Vec3 n = cloud.normals.row(i);
        CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
        // axis-aligned: exactly one unit component
        int nonzero = 0;
        for (int c = 0; c < 3; ++c) {
            if (std::abs(n[c]) > 1e-12) ++nonzero;
        }
        CHECK(nonzero == 1);
    }
}

TEST_CASE("point sampling is translation-equivariant and seed-deterministic") {
    const TriMesh box = make_box(0.4, 0.7, 1.3);
    const PointCloud base = sample_point_cloud(box, Pose::identity(), 64, 42);
    const PointCloud again = sample_point_cloud(box, Pose::identity(), 64, 42);
    CHECK(base.points == again.points); // bit-identical
    CHECK(base.normals == again.normals);

    const Vec3 t(1.5, -2.0, 0.25);
    const PointCloud moved = sample_point_cloud(box, translated(t.x(), t.y(), t.z()), 64, 42);
    CHECK((moved.points - (base.points.rowwise() + t.transpose())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((moved.normals - base.normals).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("icosphere sample mean radius close to one") {
    const TriMesh sphere = make_icosphere(1.0, 3);
    const PointCloud cloud = sample_point_cloud(sphere, Pose::identity(), 4096, 1);
    const double mean_norm = cloud.points.rowwise().norm().mean();
    CHECK(mean_norm == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unit cube inertia matches the analytic value") {
    const TriMesh cube = make_box(1, 1, 1);
    const InertialProps props = compute_inertial_props(cube, 1.0);
    CHECK(props.mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(props.center_of_mass.norm() < 1e-12);
    for (int i = 0; i < 3; ++i) {
        CHECK(props.principal_moments[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    }
    CHECK((props.principal_axes * props.principal_axes.transpose() - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-8);
}

TEST_CASE("2x1x1 box inertia: closed-form moments, long axis has smallest moment") {
    // m = 2, per-axis moment (1/12) m (b^2 + c^2): x -> 1/3, y = z -> 5/6
    const TriMesh box = make_box(2, 1, 1);
    const InertialProps props = compute_inertial_props(box, 1.0);
    CHECK(props.mass == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(props.principal_moments[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    CHECK(props.principal_moments[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    CHECK(props.principal_moments[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // the axis of the smallest moment is the geometric long axis (x)
    const Vec3 long_axis = props.axis(2);
    CHECK(std::abs(long_axis.dot(Vec3::UnitX())) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("inertia scaling law: mesh x2 with density/8 keeps mass, moments x4") {
    const TriMesh box = make_box(0.4, 0.9, 1.7);
    const InertialProps small = compute_inertial_props(box, 1.0);
    const TriMesh big = make_box(0.8, 1.8, 3.4);
    const InertialProps scaled = compute_inertial_props(big, 1.0 / 8.0);
    CHECK(scaled.mass == doctest::Approx(small.mass).epsilon(1e-10));
    for (int i = 0; i < 3; ++i) {
        CHECK(scaled.principal_moments[i] ==
              doctest::Approx(4.0 * small.principal_moments[i]).epsilon(1e-9));
    }
}

TEST_CASE("inertia is rotation-covariant up to axis sign") {
    const TriMesh box = make_box(0.3, 0.8, 1.9);
    const InertialProps base = compute_inertial_props(box, 2.0);
    const Mat3 r = Quat(Eigen::AngleAxisd(0.83, Vec3(1, 2, -1).normalized())).toRotationMatrix();
    std::vector<Vec3> rotated_vertices;
    rotated_vertices.reserve(box.vertices().size());
    for (const auto& v : box.vertices()) rotated_vertices.push_back(r * v);
    const TriMesh rot(rotated_vertices, box.faces());
    const InertialProps turned = compute_inertial_props(rot, 2.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(turned.principal_moments[i] ==
              doctest::Approx(base.principal_moments[i]).epsilon(1e-9));
        const double align = std::abs((r * base.axis(i)).dot(turned.axis(i)));
        CHECK(align == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("open mesh raises a geometry error") {
    // one triangle: signed volume 0
    const TriMesh open_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    CHECK_THROWS_AS(compute_inertial_props(open_mesh, 1.0), GeometryError);
}

TEST_CASE("collision: disjoint, overlapping, and near-contact cubes") {
    const TriMesh cube = make_box(1, 1, 1);
    CHECK_FALSE(check_collision(cube, Pose::identity(), cube, translated(3, 0, 0), 0.1));
    CHECK(check_collision(cube, Pose::identity(), cube, Pose::identity(), 0.0));
    CHECK(check_collision(cube, Pose::identity(), cube, Pose::identity(), 0.5));
    // centers 1.05 apart: face gap 0.05 < clearance 0.1
    CHECK(check_collision(cube, Pose::identity(), cube, translated(1.05, 0, 0), 0.1));
    CHECK_FALSE(check_collision(cube, Pose::identity(), cube, translated(1.05, 0, 0), 0.04));
}

TEST_CASE("collision check is symmetric") {
    const TriMesh a = make_box(1, 2, 0.5);
    const TriMesh b = make_icosphere(0.6, 1);
    Rng rng(99);
    for (int i = 0; i < 60; ++i) {
        const Pose pa = Pose::from_axis_angle(
            Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.4);
        const Pose pb = Pose::from_axis_angle(
            Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.4);
        const double clearance = rng.uniform(0.0, 0.3);
        CHECK(check_collision(a, pa, b, pb, clearance) == check_collision(b, pb, a, pa, clearance));
    }
}

TEST_CASE("triangle distance agrees with brute-force sampling") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        Vec3 a0(rng.normal(), rng.normal(), rng.normal());
        Vec3 a1 = a0 + Vec3(rng.normal(), rng.normal(), rng.normal());
        Vec3 a2 = a0 + Vec3(rng.normal(), rng.normal(), rng.normal());
        Vec3 b0 = Vec3(rng.normal(), rng.normal(), rng.normal()) + Vec3(2.5, 0, 0);
        Vec3 b1 = b0 + Vec3(rng.normal(), rng.normal(), rng.normal());
        Vec3 b2 = b0 + Vec3(rng.normal(), rng.normal(), rng.normal());
        const double fast = triangle_distance(a0, a1, a2, b0, b1, b2);
        // brute-force: dense barycentric sampling of both triangles
        double brute = std::numeric_limits<double>::max();
        const int K = 24;
        for (int i = 0; i <= K; ++i) {
            for (int j = 0; j <= K - i; ++j) {
                const double u = static_cast<double>(i) / K;
                const double v = static_cast<double>(j) / K;
                const Vec3 p = a0 + u * (a1 - a0) + v * (a2 - a0);
                for (int k = 0; k <= K; ++k) {
                    for (int l = 0; l <= K - k; ++l) {
                        const double s = static_cast<double>(k) / K;
                        const double t = static_cast<double>(l) / K;
                        const Vec3 q = b0 + s * (b1 - b0) + t * (b2 - b0);
                        brute = std::min(brute, (p - q).norm());
                    }
                }
            }
        }
        CHECK(fast <= brute + 1e-9);
        CHECK(fast >= brute - 0.25); // sampling resolution bound
    }
}

TEST_CASE("sweep over empty space is fully free") {
    const TriMesh cube = make_box(1, 1, 1);
    const double frac = sweep_free_fraction(cube, Pose::identity(), translated(10, 0, 0), {}, 0.0,
                                            0.01);
    CHECK(frac == 1.0);
}

TEST_CASE("sweep toward a wall stops at the analytic first contact") {
    const TriMesh cube = make_box(1, 1, 1);
    const TriMesh wall = make_box(1, 5, 5);
    const PosedMesh obstacles[] = {{&wall, translated(2.5, 0, 0)}}; // occupies x in [2,3]
    const double step = 0.01;
    const double frac = sweep_free_fraction(cube, Pose::identity(), translated(4, 0, 0), obstacles,
                                            0.0, step);
    // contact when +x face (0.5 + d) reaches 2  =>  d = 1.5, lambda = 0.375
    CHECK(std::abs(frac - 0.375) <= step + 1e-12);
}

TEST_CASE("sweep from a colliding start returns zero") {
    const TriMesh cube = make_box(1, 1, 1);
    const TriMesh wall = make_box(1, 5, 5);
    const PosedMesh obstacles[] = {{&wall, Pose::identity()}};
    CHECK(sweep_free_fraction(cube, Pose::identity(), translated(4, 0, 0), obstacles, 0.0, 0.01) ==
          0.0);
}

TEST_CASE("sweep free fraction is monotone non-increasing in clearance") {
    const TriMesh cube = make_box(1, 1, 1);
    const TriMesh wall = make_box(1, 5, 5);
    const PosedMesh obstacles[] = {{&wall, translated(2.5, 0, 0)}};
    double prev = 2.0;
    for (const double clearance : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        const double frac = sweep_free_fraction(cube, Pose::identity(), translated(4, 0, 0),
                                                obstacles, clearance, 0.01);
        CHECK(frac <= prev + 1e-12);
        prev = frac;
    }
}

TEST_CASE("rotational sweep detects blocking via pose path") {
    const TriMesh bar = make_box(2.0, 0.2, 0.2);
    const TriMesh post = make_box(0.2, 0.2, 2.0);
    const PosedMesh obstacles[] = {{&post, translated(0, 1.05, 0)}};
    // Quarter-turn about z swings the bar into the post.
    const auto path = [&](double s) {
        return rotated(Vec3::UnitZ(), s * M_PI / 2.0);
    };
    const double frac = sweep_path_free_fraction(bar, path, 64, obstacles, 0.0);
    CHECK(frac < 1.0);
    CHECK(frac > 0.0);
}

TEST_CASE("point to mesh distance") {
    const TriMesh cube = make_box(1, 1, 1);
    CHECK(point_mesh_distance(Vec3(2, 0, 0), cube, Pose::identity()) == doctest::Approx(1.5));
    CHECK(point_mesh_distance(Vec3(0.5, 0, 0), cube, Pose::identity()) == doctest::Approx(0.0));
    const Pose shifted = translated(1, 0, 0);
    CHECK(point_mesh_distance(Vec3(3, 0, 0), cube, shifted) == doctest::Approx(1.5));
}

TEST_CASE("OBJ round trip preserves geometry") {
    const TriMesh box = make_box(0.3, 0.5, 0.9);
    const std::string path = "test_roundtrip.obj";
    save_obj(path, box);
    const TriMesh loaded = load_obj(path);
    REQUIRE(loaded.vertices().size() == box.vertices().size());
    REQUIRE(loaded.faces().size() == box.faces().size());
    for (std::size_t i = 0; i < box.vertices().size(); ++i) {
        CHECK((loaded.vertices()[i] - box.vertices()[i]).norm() < 1e-15);
    }
    CHECK(loaded.content_hash() == box.content_hash());
    std::remove(path.c_str());
}

TEST_CASE("bounding sphere encloses all vertices") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const TriMesh box = make_box(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                                     rng.uniform(0.1, 2.0));
        for (const auto& v : box.vertices()) {
            CHECK((v - box.bounding_center()).norm() <= box.bounding_radius() + 1e-9);
        }
    }
}
