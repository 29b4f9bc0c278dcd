#pragma once

#include <cstdint>
#include <vector>

#include "asp/geom/mesh.hpp"

namespace asp::geom {

// Surface samples with unit outward normals. points and normals are N x 3.
struct PointCloud {
    Eigen::MatrixXd points;
    Eigen::MatrixXd normals;

    Eigen::Index size() const { return points.rows(); }

    PointCloud transformed(const Pose& pose) const;
};

// Area-uniform surface sampling; normals come from the source faces.
// Deterministic for a fixed seed.
PointCloud sample_point_cloud(const TriMesh& mesh, const Pose& pose, int n, std::uint64_t seed);

// Farthest-point subsample; returns indices into the cloud (first index is the
// point closest to the centroid, so the result is deterministic).
std::vector<int> farthest_point_indices(const PointCloud& cloud, int count);

} // namespace asp::geom
