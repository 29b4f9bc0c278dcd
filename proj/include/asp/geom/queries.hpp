#pragma once

#include <functional>
#include <span>

#include "asp/geom/mesh.hpp"

namespace asp::geom {

// Exact closest distance between two triangles (0 if they intersect).
double triangle_distance(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2);

// True iff any triangle of a (at pose_a) is within `clearance` of any triangle
// of b (at pose_b). Exact narrow phase under BVH pruning; symmetric in (a, b).
bool check_collision(const TriMesh& a, const Pose& pose_a, const TriMesh& b, const Pose& pose_b,
                     double clearance);

bool in_collision_with_any(const TriMesh& moving, const Pose& pose,
                           std::span<const PosedMesh> obstacles, double clearance);

// Closest distance from a world-space point to a posed mesh surface.
double point_mesh_distance(const Vec3& point, const TriMesh& mesh, const Pose& pose);

// Largest prefix fraction of the linear/slerp sweep from `from` to `to` whose
// sampled poses (parameters 0, step, 2*step, ..., 1) are all collision-free.
// Returns 1 when the whole sweep is free and 0 when `from` already collides.
double sweep_free_fraction(const TriMesh& moving, const Pose& from, const Pose& to,
                           std::span<const PosedMesh> obstacles, double clearance, double step);

// Same prefix semantics for an arbitrary pose path sampled at n_steps+1
// parameters (path(0) through path(1)).
double sweep_path_free_fraction(const TriMesh& moving, const std::function<Pose(double)>& path,
                                int n_steps, std::span<const PosedMesh> obstacles,
                                double clearance);

// Default interpolation resolution for a sweep of the given path length:
// min(0.01, shortest_edge / path_length), clamped to a sane sample budget.
double default_sweep_step(const TriMesh& moving, double path_length);

constexpr double kPlanningClearance = 1e-4; // meters; planning-time queries
constexpr double kContactClearance = 0.0;   // ground-truth contact queries

} // namespace asp::geom
