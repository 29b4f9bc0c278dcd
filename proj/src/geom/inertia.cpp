#include "asp/geom/inertia.hpp"

#include <cmath>

#include "asp/core/error.hpp"

namespace asp::geom {

bool InertialProps::degenerate(double rel_tol) const {
    const double scale = std::max(std::abs(principal_moments[0]), 1e-300);
    return std::abs(principal_moments[0] - principal_moments[1]) <= rel_tol * scale ||
           std::abs(principal_moments[1] - principal_moments[2]) <= rel_tol * scale;
}

InertialProps compute_inertial_props(const TriMesh& mesh, double density) {
    if (density <= 0.0) throw InvalidInputError("density must be positive");
    if (mesh.empty()) throw GeometryError("cannot compute inertia of an empty mesh");

    // Kallay's monomial accumulation over signed tetrahedra (origin apex).
    double volume6 = 0.0;
    Vec3 centroid_acc = Vec3::Zero();
    double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0, xz = 0.0, yz = 0.0;
    for (std::size_t i = 0; i < mesh.face_count(); ++i) {
        const Vec3 v1 = mesh.triangle_vertex(static_cast<int>(i), 0);
        const Vec3 v2 = mesh.triangle_vertex(static_cast<int>(i), 1);
        const Vec3 v3 = mesh.triangle_vertex(static_cast<int>(i), 2);
        const double det = v1.dot(v2.cross(v3));
        volume6 += det;
        const Vec3 v4 = v1 + v2 + v3;
        centroid_acc += det * v4;
        xx += det * (v1.x() * v1.x() + v2.x() * v2.x() + v3.x() * v3.x() + v4.x() * v4.x());
        yy += det * (v1.y() * v1.y() + v2.y() * v2.y() + v3.y() * v3.y() + v4.y() * v4.y());
        zz += det * (v1.z() * v1.z() + v2.z() * v2.z() + v3.z() * v3.z() + v4.z() * v4.z());
        xy += det * (v1.x() * v1.y() + v2.x() * v2.y() + v3.x() * v3.y() + v4.x() * v4.y());
        xz += det * (v1.x() * v1.z() + v2.x() * v2.z() + v3.x() * v3.z() + v4.x() * v4.z());
        yz += det * (v1.y() * v1.z() + v2.y() * v2.z() + v3.y() * v3.z() + v4.y() * v4.z());
    }
    const double volume = volume6 / 6.0;
    if (volume <= 0.0) {
        throw GeometryError("mesh has non-positive signed volume (open or inverted)");
    }

    InertialProps props;
    props.mass = density * volume;
    props.center_of_mass = centroid_acc / (4.0 * volume6);

    Mat3 inertia_origin;
    const double k = density / 120.0;
    inertia_origin << k * (yy + zz), -k * xy, -k * xz,
                      -k * xy, k * (xx + zz), -k * yz,
                      -k * xz, -k * yz, k * (xx + yy);

    // Shift to the COM (inverse parallel-axis step).
    const Vec3& c = props.center_of_mass;
    Mat3 steiner;
    steiner << c.y() * c.y() + c.z() * c.z(), -c.x() * c.y(), -c.x() * c.z(),
               -c.x() * c.y(), c.x() * c.x() + c.z() * c.z(), -c.y() * c.z(),
               -c.x() * c.z(), -c.y() * c.z(), c.x() * c.x() + c.y() * c.y();
    props.inertia_com = inertia_origin - props.mass * steiner;

    Eigen::SelfAdjointEigenSolver<Mat3> eig(props.inertia_com);
    if (eig.info() != Eigen::Success) throw GeometryError("inertia eigendecomposition failed");

    // Eigen returns ascending eigenvalues; we want descending moments.
    for (int i = 0; i < 3; ++i) {
        const int src = 2 - i;
        props.principal_moments[i] = std::max(0.0, eig.eigenvalues()[src]);
        Vec3 axis = eig.eigenvectors().col(src);
        const double d = axis.sum(); // dot with (1,1,1)
        if (std::abs(d) > 1e-12) {
            if (d < 0.0) axis = -axis;
        } else {
            for (int j = 0; j < 3; ++j) {
                if (std::abs(axis[j]) > 1e-12) {
                    if (axis[j] < 0.0) axis = -axis;
                    break;
                }
            }
        }
        props.principal_axes.col(i) = axis;
    }
    return props;
}

} // namespace asp::geom
