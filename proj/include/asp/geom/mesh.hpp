#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "asp/geom/pose.hpp"

namespace asp::geom {

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
    Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    bool valid() const { return (lo.array() <= hi.array()).all(); }

    // Conservative world-space box of this box under a rigid transform.
    Aabb transformed(const Pose& pose) const;
};

double aabb_distance(const Aabb& a, const Aabb& b);
double aabb_point_distance(const Aabb& a, const Vec3& p);

struct BvhNode {
    Aabb box;
    std::int32_t left = -1;   // internal: child indices; leaf: -1
    std::int32_t right = -1;
    std::int32_t begin = 0;   // leaf: range into triangle order
    std::int32_t count = 0;
};

// Immutable triangle mesh. Validation, the BVH, bounds and a content hash are
// all fixed at construction, so meshes can be shared freely across threads.
class TriMesh {
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    std::size_t face_count() const { return faces_.size(); }
    bool empty() const { return faces_.empty(); }

    Vec3 triangle_vertex(int face, int corner) const {
        return vertices_[static_cast<std::size_t>(faces_[static_cast<std::size_t>(face)][static_cast<std::size_t>(corner)])];
    }
    // Unit normal of a face (CCW winding).
    Vec3 face_normal(int face) const;
    double face_area(int face) const;
    double total_area() const { return total_area_; }

    const Aabb& bounds() const { return bounds_; }
    Vec3 bounding_center() const { return sphere_center_; }
    double bounding_radius() const { return sphere_radius_; }
    double shortest_edge() const { return shortest_edge_; }

    const std::vector<BvhNode>& bvh() const { return bvh_nodes_; }
    const std::vector<std::int32_t>& bvh_order() const { return bvh_order_; }

    // FNV-1a over vertex/face bytes; used for cheap canonical ordering of
    // mesh pairs in symmetric queries.
    std::uint64_t content_hash() const { return content_hash_; }

private:
    void build_bvh();

    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<BvhNode> bvh_nodes_;
    std::vector<std::int32_t> bvh_order_;
    Aabb bounds_;
    Vec3 sphere_center_ = Vec3::Zero();
    double sphere_radius_ = 0.0;
    double shortest_edge_ = 0.0;
    double total_area_ = 0.0;
    std::uint64_t content_hash_ = 0;
};

// A mesh placed in the world; the mesh is borrowed, not owned.
struct PosedMesh {
    const TriMesh* mesh = nullptr;
    Pose pose;
};

TriMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const TriMesh& mesh);

// Axis-aligned box of the given full extents, centered at the origin.
TriMesh make_box(double sx, double sy, double sz);
// Icosphere with the given subdivision level (0 = icosahedron).
TriMesh make_icosphere(double radius, int subdivisions);
// Concatenates meshes (disjoint closed components stay closed).
TriMesh merge_meshes(const std::vector<TriMesh>& parts);
// Same mesh with all vertices offset so `new_origin` becomes the origin.
TriMesh recenter(const TriMesh& mesh, const Vec3& new_origin);

} // namespace asp::geom
