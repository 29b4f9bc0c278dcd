#include "asp/contact/grasp.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"

namespace asp::contact {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Generalized cross product: the vector orthogonal to five 6-vectors,
// computed by cofactor expansion along a virtual sixth row.
Vec6 orthogonal_complement(const Eigen::Matrix<double, 5, 6>& rows) {
    Vec6 n;
    Eigen::Matrix<double, 5, 5> minor;
    for (int j = 0; j < 6; ++j) {
        int col = 0;
        for (int k = 0; k < 6; ++k) {
            if (k == j) continue;
            minor.col(col++) = rows.col(k);
        }
        const double det = minor.determinant();
        n[j] = ((j % 2) == 0 ? 1.0 : -1.0) * det;
    }
    return n;
}

void cone_forces(const Vec3& inward_normal, double mu, int cone_edges, std::vector<Vec3>* out) {
    Vec3 t1, t2;
    tangent_basis(inward_normal, &t1, &t2);
    for (int k = 0; k < cone_edges; ++k) {
        const double theta = 2.0 * kPi * k / cone_edges;
        const Vec3 f = (inward_normal + mu * (std::cos(theta) * t1 + std::sin(theta) * t2));
        out->push_back(f.normalized());
    }
}

} // namespace

double hull_origin_depth(const std::vector<Vec6>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 7) return 0.0; // cannot enclose an interior point in 6-D

    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.norm());
    if (scale <= 0.0) return 0.0;
    const double side_tol = 1e-9 * scale;

    // Full-dimensionality check.
    Eigen::MatrixXd diffs(n - 1, 6);
    for (int i = 1; i < n; ++i) diffs.row(i - 1) = (points[static_cast<std::size_t>(i)] - points[0]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs);
    if (svd.singularValues()[5] <= 1e-9 * svd.singularValues()[0]) return 0.0;

    double min_offset = std::numeric_limits<double>::max();
    bool found_facet = false;

    int idx[6];
    // Enumerate all 6-subsets; every supporting hyperplane with an affinely
    // independent 6-subset of hull vertices is visited at least once.
    for (idx[0] = 0; idx[0] < n - 5; ++idx[0])
    for (idx[1] = idx[0] + 1; idx[1] < n - 4; ++idx[1])
    for (idx[2] = idx[1] + 1; idx[2] < n - 3; ++idx[2])
    for (idx[3] = idx[2] + 1; idx[3] < n - 2; ++idx[3])
    for (idx[4] = idx[3] + 1; idx[4] < n - 1; ++idx[4])
    for (idx[5] = idx[4] + 1; idx[5] < n; ++idx[5]) {
        const Vec6& p0 = points[static_cast<std::size_t>(idx[0])];
        Eigen::Matrix<double, 5, 6> rows;
        for (int r = 0; r < 5; ++r) {
            rows.row(r) = (points[static_cast<std::size_t>(idx[r + 1])] - p0).transpose();
        }
        Vec6 normal = orthogonal_complement(rows);
        const double nn = normal.norm();
        if (nn <= 1e-12 * std::pow(scale, 5)) continue; // affinely dependent subset
        normal /= nn;

        bool pos = false, neg = false;
        for (int i = 0; i < n && !(pos && neg); ++i) {
            const double side = normal.dot(points[static_cast<std::size_t>(i)] - p0);
            if (side > side_tol) pos = true;
            if (side < -side_tol) neg = true;
        }
        if (pos && neg) continue; // not a supporting hyperplane
        if (pos) normal = -normal; // orient outward: all points on the <= side
        found_facet = true;
        min_offset = std::min(min_offset, normal.dot(p0));
        if (min_offset <= 0.0) return 0.0; // origin on or outside this facet
    }
    if (!found_facet) return 0.0;
    return std::max(0.0, min_offset);
}

double ferrari_canny(const GraspPair& pair, const Vec3& com, double mu, int cone_edges,
                     double part_scale) {
    if (cone_edges < 3) throw InvalidInputError("ferrari_canny needs at least 3 cone edges");
    if (mu <= 0.0) throw InvalidInputError("friction coefficient must be positive");
    if (part_scale <= 0.0) throw InvalidInputError("part_scale must be positive");

    std::vector<Vec3> forces_a, forces_b;
    cone_forces(pair.normal_a, mu, cone_edges, &forces_a);
    cone_forces(pair.normal_b, mu, cone_edges, &forces_b);

    std::vector<Vec6> wrenches;
    wrenches.reserve(static_cast<std::size_t>(2 * cone_edges));
    const auto push_wrenches = [&](const Vec3& point, const std::vector<Vec3>& forces) {
        const Vec3 lever = point - com;
        for (const auto& f : forces) {
            Vec6 w;
            w.head<3>() = f;
            w.tail<3>() = lever.cross(f) / part_scale;
            wrenches.push_back(w);
        }
    };
    push_wrenches(pair.point_a, forces_a);
    push_wrenches(pair.point_b, forces_b);
    return hull_origin_depth(wrenches);
}

std::vector<GraspPair> antipodal_pairs(const PointCloud& cloud, double mu,
                                       double antipodal_tol_deg) {
    if (mu <= 0.0) throw InvalidInputError("friction coefficient must be positive");
    const std::vector<int> picks = farthest_point_indices(cloud, kGraspCandidateBudget);
    const double max_angle = std::atan(mu) + antipodal_tol_deg * kPi / 180.0;
    const double min_cos = std::cos(max_angle);

    std::vector<GraspPair> pairs;
    for (std::size_t a = 0; a < picks.size(); ++a) {
        for (std::size_t b = a + 1; b < picks.size(); ++b) {
            const Vec3 pa = cloud.points.row(picks[a]);
            const Vec3 pb = cloud.points.row(picks[b]);
            const Vec3 na = -cloud.normals.row(picks[a]).transpose(); // inward
            const Vec3 nb = -cloud.normals.row(picks[b]).transpose();
            const Vec3 link = pb - pa;
            const double len = link.norm();
            if (len < 1e-9) continue;
            const Vec3 u = link / len;
            if (u.dot(na) < min_cos) continue;
            if ((-u).dot(nb) < min_cos) continue;
            GraspPair pair;
            pair.point_a = pa;
            pair.point_b = pb;
            pair.normal_a = na;
            pair.normal_b = nb;
            pair.index_a = picks[a];
            pair.index_b = picks[b];
            pairs.push_back(pair);
        }
    }
    return pairs;
}

std::vector<GraspPair> enumerate_grasp_pairs(const PointCloud& cloud, double mu,
                                             double antipodal_tol_deg, const Vec3& com,
                                             double part_scale, int cone_edges) {
    std::vector<GraspPair> pairs = antipodal_pairs(cloud, mu, antipodal_tol_deg);
    for (auto& pair : pairs) {
        pair.quality = ferrari_canny(pair, com, mu, cone_edges, part_scale);
    }
    std::sort(pairs.begin(), pairs.end(), [](const GraspPair& a, const GraspPair& b) {
        if (a.quality != b.quality) return a.quality > b.quality;
        if (a.index_a != b.index_a) return a.index_a < b.index_a;
        return a.index_b < b.index_b;
    });
    return pairs;
}

std::vector<GraspPair> enumerate_grasp_pairs(const PointCloud& cloud, double mu,
                                             double antipodal_tol_deg) {
    const Vec3 centroid = cloud.points.colwise().mean().transpose();
    double radius = 1e-6;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        radius = std::max(radius, (cloud.points.row(i).transpose() - centroid).norm());
    }
    return enumerate_grasp_pairs(cloud, mu, antipodal_tol_deg, centroid, radius,
                                 kDefaultConeEdges);
}

} // namespace asp::contact
