#pragma once

#include "asp/geom/mesh.hpp"

namespace asp::geom {

// Mass properties of a closed mesh. Principal axes are orthonormal, sorted by
// descending moment, with signs fixed to the positive (1,1,1) hemisphere.
struct InertialProps {
    double mass = 0.0;
    Vec3 center_of_mass = Vec3::Zero();
    Mat3 principal_axes = Mat3::Identity(); // columns are the axes
    Vec3 principal_moments = Vec3::Zero();  // descending
    Mat3 inertia_com = Mat3::Zero();        // full tensor about the COM

    Vec3 axis(int i) const { return principal_axes.col(i); }
    // True when two (or all three) principal moments coincide within a
    // relative tolerance, i.e. the axes are not uniquely determined.
    bool degenerate(double rel_tol = 1e-6) const;
};

// Signed-tetrahedron integration over the surface. Throws GeometryError when
// the signed volume is not positive (open or inverted mesh).
InertialProps compute_inertial_props(const TriMesh& mesh, double density);

} // namespace asp::geom
