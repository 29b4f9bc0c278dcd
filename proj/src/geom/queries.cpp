#include "asp/geom/queries.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "asp/core/error.hpp"

namespace asp::geom {

namespace {

// Eberly-style closest point on triangle.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

// Sign of p relative to plane through (a,b,c).
double plane_side(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return (b - a).cross(c - a).dot(p - a);
}

bool segment_triangle_intersect(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    const double dp = n.dot(p - a);
    const double dq = n.dot(q - a);
    if (dp * dq > 0.0) return false; // both on same side
    const double denom = dp - dq;
    if (std::abs(denom) < 1e-300) return false; // segment parallel to plane
    const double t = dp / denom;
    const Vec3 x = p + t * (q - p);
    // Inside test via same-side on the three edge planes.
    const Vec3 e0 = b - a, e1 = c - b, e2 = a - c;
    const double s0 = e0.cross(x - a).dot(n);
    const double s1 = e1.cross(x - b).dot(n);
    const double s2 = e2.cross(x - c).dot(n);
    return s0 >= -1e-14 && s1 >= -1e-14 && s2 >= -1e-14;
}

struct WorldTri {
    Vec3 v0, v1, v2;
};

WorldTri world_triangle(const TriMesh& m, const Pose& pose, int face) {
    return {pose.apply(m.triangle_vertex(face, 0)), pose.apply(m.triangle_vertex(face, 1)),
            pose.apply(m.triangle_vertex(face, 2))};
}

} // namespace

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
    const Vec3 d1 = p1 - p0;
    const Vec3 d2 = q1 - q0;
    const Vec3 r = p0 - q0;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    double s = 0.0, t = 0.0;
    if (a <= 1e-30 && e <= 1e-30) {
        return r.norm();
    }
    if (a <= 1e-30) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= 1e-30) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2) {
    // Quick rejection: all of B strictly on one side of A's plane, or vice versa.
    const double sb0 = plane_side(b0, a0, a1, a2);
    const double sb1 = plane_side(b1, a0, a1, a2);
    const double sb2 = plane_side(b2, a0, a1, a2);
    if ((sb0 > 0 && sb1 > 0 && sb2 > 0) || (sb0 < 0 && sb1 < 0 && sb2 < 0)) return false;
    const double sa0 = plane_side(a0, b0, b1, b2);
    const double sa1 = plane_side(a1, b0, b1, b2);
    const double sa2 = plane_side(a2, b0, b1, b2);
    if ((sa0 > 0 && sa1 > 0 && sa2 > 0) || (sa0 < 0 && sa1 < 0 && sa2 < 0)) return false;
    // Edge-vs-triangle both ways covers all transversal intersections.
    return segment_triangle_intersect(a0, a1, b0, b1, b2) ||
           segment_triangle_intersect(a1, a2, b0, b1, b2) ||
           segment_triangle_intersect(a2, a0, b0, b1, b2) ||
           segment_triangle_intersect(b0, b1, a0, a1, a2) ||
           segment_triangle_intersect(b1, b2, a0, a1, a2) ||
           segment_triangle_intersect(b2, b0, a0, a1, a2);
}

double triangle_distance(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2) {
    if (triangles_intersect(a0, a1, a2, b0, b1, b2)) return 0.0;
    double d = std::numeric_limits<double>::max();
    const Vec3 ea[3][2] = {{a0, a1}, {a1, a2}, {a2, a0}};
    const Vec3 eb[3][2] = {{b0, b1}, {b1, b2}, {b2, b0}};
    for (const auto& sa : ea) {
        for (const auto& sb : eb) {
            d = std::min(d, segment_segment_distance(sa[0], sa[1], sb[0], sb[1]));
        }
    }
    d = std::min(d, point_triangle_distance(a0, b0, b1, b2));
    d = std::min(d, point_triangle_distance(a1, b0, b1, b2));
    d = std::min(d, point_triangle_distance(a2, b0, b1, b2));
    d = std::min(d, point_triangle_distance(b0, a0, a1, a2));
    d = std::min(d, point_triangle_distance(b1, a0, a1, a2));
    d = std::min(d, point_triangle_distance(b2, a0, a1, a2));
    return d;
}

namespace {

// Dual-BVH traversal; returns true as soon as a triangle pair is within
// `clearance`. Node boxes are moved to world space on the fly (conservative).
bool bvh_within_clearance(const TriMesh& a, const Pose& pa, const TriMesh& b, const Pose& pb,
                          double clearance) {
    if (a.empty() || b.empty()) return false;
    struct Item {
        std::int32_t na, nb;
    };
    const auto& nodes_a = a.bvh();
    const auto& nodes_b = b.bvh();
    std::vector<Item> stack{{0, 0}};
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const BvhNode& na = nodes_a[static_cast<std::size_t>(it.na)];
        const BvhNode& nb = nodes_b[static_cast<std::size_t>(it.nb)];
        const Aabb wa = na.box.transformed(pa);
        const Aabb wb = nb.box.transformed(pb);
        if (aabb_distance(wa, wb) > clearance) continue;
        const bool leaf_a = na.left < 0;
        const bool leaf_b = nb.left < 0;
        if (leaf_a && leaf_b) {
            for (std::int32_t i = na.begin; i < na.begin + na.count; ++i) {
                const WorldTri ta = world_triangle(a, pa, a.bvh_order()[static_cast<std::size_t>(i)]);
                for (std::int32_t j = nb.begin; j < nb.begin + nb.count; ++j) {
                    const WorldTri tb =
                        world_triangle(b, pb, b.bvh_order()[static_cast<std::size_t>(j)]);
                    if (triangle_distance(ta.v0, ta.v1, ta.v2, tb.v0, tb.v1, tb.v2) <= clearance) {
                        return true;
                    }
                }
            }
            continue;
        }
        // Descend the larger node (by world volume heuristic: extent norm).
        const bool descend_a =
            !leaf_a && (leaf_b || wa.extent().squaredNorm() >= wb.extent().squaredNorm());
        if (descend_a) {
            stack.push_back({na.left, it.nb});
            stack.push_back({na.right, it.nb});
        } else {
            stack.push_back({it.na, nb.left});
            stack.push_back({it.na, nb.right});
        }
    }
    return false;
}

} // namespace

bool check_collision(const TriMesh& a, const Pose& pose_a, const TriMesh& b, const Pose& pose_b,
                     double clearance) {
    if (clearance < 0.0) throw InvalidInputError("clearance must be >= 0");
    // Canonical argument order keeps the result bit-stable under swap.
    const bool swap = a.content_hash() > b.content_hash();
    const TriMesh& ma = swap ? b : a;
    const TriMesh& mb = swap ? a : b;
    const Pose& qa = swap ? pose_b : pose_a;
    const Pose& qb = swap ? pose_a : pose_b;
    return bvh_within_clearance(ma, qa, mb, qb, clearance);
}

bool in_collision_with_any(const TriMesh& moving, const Pose& pose,
                           std::span<const PosedMesh> obstacles, double clearance) {
    for (const auto& obs : obstacles) {
        if (check_collision(moving, pose, *obs.mesh, obs.pose, clearance)) return true;
    }
    return false;
}

double point_mesh_distance(const Vec3& point, const TriMesh& mesh, const Pose& pose) {
    if (mesh.empty()) return std::numeric_limits<double>::max();
    const Vec3 local = pose.inverse().apply(point); // query in mesh frame: exact, cheaper
    const auto& nodes = mesh.bvh();
    double best = std::numeric_limits<double>::max();
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const std::int32_t ni = stack.back();
        stack.pop_back();
        const BvhNode& node = nodes[static_cast<std::size_t>(ni)];
        if (aabb_point_distance(node.box, local) >= best) continue;
        if (node.left < 0) {
            for (std::int32_t i = node.begin; i < node.begin + node.count; ++i) {
                const int face = mesh.bvh_order()[static_cast<std::size_t>(i)];
                best = std::min(best, point_triangle_distance(local, mesh.triangle_vertex(face, 0),
                                                              mesh.triangle_vertex(face, 1),
                                                              mesh.triangle_vertex(face, 2)));
            }
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    return best;
}

double sweep_path_free_fraction(const TriMesh& moving, const std::function<Pose(double)>& path,
                                int n_steps, std::span<const PosedMesh> obstacles,
                                double clearance) {
    if (n_steps < 1) throw InvalidInputError("sweep needs at least one step");
    double last_free = 0.0;
    for (int k = 0; k <= n_steps; ++k) {
        const double lambda = static_cast<double>(k) / n_steps;
        if (in_collision_with_any(moving, path(lambda), obstacles, clearance)) {
            return k == 0 ? 0.0 : last_free;
        }
        last_free = lambda;
    }
    return 1.0;
}

double sweep_free_fraction(const TriMesh& moving, const Pose& from, const Pose& to,
                           std::span<const PosedMesh> obstacles, double clearance, double step) {
    if (step <= 0.0) throw InvalidInputError("sweep step must be > 0");
    const int n_steps = std::max(1, static_cast<int>(std::ceil(1.0 / step)));
    return sweep_path_free_fraction(
        moving, [&](double s) { return interpolate(from, to, s); }, n_steps, obstacles, clearance);
}

double default_sweep_step(const TriMesh& moving, double path_length) {
    if (path_length <= 0.0) return 1.0;
    const double edge = moving.shortest_edge();
    double step = std::min(0.01, edge > 0.0 ? edge / path_length : 0.01);
    // Bound the per-sweep sample budget.
    step = std::max(step, 1.0 / 8192.0);
    return step;
}

} // namespace asp::geom
