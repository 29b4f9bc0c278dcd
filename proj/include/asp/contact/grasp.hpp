#pragma once

#include <optional>
#include <vector>

#include "asp/contact/wrench.hpp"
#include "asp/geom/point_cloud.hpp"

namespace asp::contact {

using geom::PointCloud;

// Two-point antipodal grasp candidate. Normals point into the part.
struct GraspPair {
    Vec3 point_a = Vec3::Zero();
    Vec3 point_b = Vec3::Zero();
    Vec3 normal_a = Vec3::UnitZ();
    Vec3 normal_b = -Vec3::UnitZ();
    double quality = 0.0;
    int index_a = -1; // candidate indices, used for deterministic ordering
    int index_b = -1;
};

// Distance from the origin to the boundary of the convex hull of `points`
// when the origin is strictly interior, else 0. Brute-force supporting
// hyperplane enumeration; intended for small point sets (tens of points).
double hull_origin_depth(const std::vector<Vec6>& points);

// Ferrari-Canny quality of a two-contact grasp: each friction cone is
// discretized into `cone_edges` unit forces, mapped to wrenches about `com`
// with torques scaled by 1/part_scale; quality is the origin depth of the
// hull of the union of all wrenches (L1 grasp wrench space).
double ferrari_canny(const GraspPair& pair, const Vec3& com, double mu, int cone_edges,
                     double part_scale);

// All antipodal candidate pairs from at most 64 farthest-point samples of the
// cloud: each inward normal must lie within atan(mu) + tol of the joining
// line. No quality scoring; deterministic order.
std::vector<GraspPair> antipodal_pairs(const PointCloud& cloud, double mu,
                                       double antipodal_tol_deg);

// Scored + sorted (descending quality, then candidate indices).
std::vector<GraspPair> enumerate_grasp_pairs(const PointCloud& cloud, double mu,
                                             double antipodal_tol_deg, const Vec3& com,
                                             double part_scale, int cone_edges = 8);
// Convenience overload: wrench origin = cloud centroid, scale = cloud radius.
std::vector<GraspPair> enumerate_grasp_pairs(const PointCloud& cloud, double mu,
                                             double antipodal_tol_deg);

constexpr double kDefaultFriction = 0.2;
constexpr int kDefaultConeEdges = 8;
constexpr double kDefaultAntipodalTolDeg = 10.0;
constexpr int kGraspCandidateBudget = 64;

} // namespace asp::contact
