#include "asp/geom/point_cloud.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"

namespace asp::geom {

PointCloud PointCloud::transformed(const Pose& pose) const {
    PointCloud out;
    const Eigen::Matrix3d r = pose.q.toRotationMatrix();
    out.points = points * r.transpose();
    out.points.rowwise() += pose.t.transpose();
    out.normals = normals * r.transpose();
    return out;
}

PointCloud sample_point_cloud(const TriMesh& mesh, const Pose& pose, int n, std::uint64_t seed) {
    if (mesh.empty()) throw InvalidInputError("cannot sample an empty mesh");
    if (n < 1) throw InvalidInputError("sample count must be >= 1");

    const std::size_t nf = mesh.face_count();
    std::vector<double> cumulative(nf);
    double acc = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        acc += mesh.face_area(static_cast<int>(i));
        cumulative[i] = acc;
    }

    Rng rng(seed);
    PointCloud cloud;
    cloud.points.resize(n, 3);
    cloud.normals.resize(n, 3);
    for (int s = 0; s < n; ++s) {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        const int face = static_cast<int>(std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()), nf - 1));
        const Vec3 a = mesh.triangle_vertex(face, 0);
        const Vec3 b = mesh.triangle_vertex(face, 1);
        const Vec3 c = mesh.triangle_vertex(face, 2);
        // sqrt trick for uniform barycentric coordinates
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const Vec3 p = (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c;
        const Vec3 world_p = pose.apply(p);
        const Vec3 world_n = pose.rotate(mesh.face_normal(face));
        cloud.points.row(s) = world_p.transpose();
        cloud.normals.row(s) = world_n.transpose();
    }
    return cloud;
}

std::vector<int> farthest_point_indices(const PointCloud& cloud, int count) {
    const int n = static_cast<int>(cloud.size());
    if (n == 0 || count <= 0) return {};
    if (count >= n) {
        std::vector<int> all(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
        return all;
    }
    const Eigen::RowVector3d centroid = cloud.points.colwise().mean();
    int first = 0;
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        const double d = (cloud.points.row(i) - centroid).squaredNorm();
        if (d < best) {
            best = d;
            first = i;
        }
    }
    std::vector<int> picked{first};
    Eigen::VectorXd min_dist(n);
    for (int i = 0; i < n; ++i) {
        min_dist[i] = (cloud.points.row(i) - cloud.points.row(first)).squaredNorm();
    }
    while (static_cast<int>(picked.size()) < count) {
        int next = 0;
        double far = -1.0;
        for (int i = 0; i < n; ++i) {
            if (min_dist[i] > far) {
                far = min_dist[i];
                next = i;
            }
        }
        picked.push_back(next);
        for (int i = 0; i < n; ++i) {
            min_dist[i] =
                std::min(min_dist[i], (cloud.points.row(i) - cloud.points.row(next)).squaredNorm());
        }
    }
    return picked;
}

} // namespace asp::geom
