#include "asp/geom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "asp/core/error.hpp"

namespace asp::geom {

namespace {

constexpr double kMinTriangleArea = 1e-12;

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

Aabb Aabb::transformed(const Pose& pose) const {
    Aabb out;
    for (int i = 0; i < 8; ++i) {
        const Vec3 corner((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                          (i & 4) ? hi.z() : lo.z());
        out.expand(pose.apply(corner));
    }
    return out;
}

double aabb_distance(const Aabb& a, const Aabb& b) {
    const Vec3 d = (a.lo - b.hi).cwiseMax(b.lo - a.hi).cwiseMax(Vec3::Zero());
    return d.norm();
}

double aabb_point_distance(const Aabb& a, const Vec3& p) {
    const Vec3 d = (a.lo - p).cwiseMax(p - a.hi).cwiseMax(Vec3::Zero());
    return d.norm();
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    const int n = static_cast<int>(vertices_.size());
    shortest_edge_ = std::numeric_limits<double>::max();
    for (const auto& f : faces_) {
        for (int c = 0; c < 3; ++c) {
            if (f[static_cast<std::size_t>(c)] < 0 || f[static_cast<std::size_t>(c)] >= n) {
                throw InvalidInputError("mesh face index out of range");
            }
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            throw InvalidInputError("mesh face repeats a vertex index");
        }
        const Vec3& a = vertices_[static_cast<std::size_t>(f[0])];
        const Vec3& b = vertices_[static_cast<std::size_t>(f[1])];
        const Vec3& c = vertices_[static_cast<std::size_t>(f[2])];
        const double area = 0.5 * (b - a).cross(c - a).norm();
        if (area <= kMinTriangleArea) {
            throw InvalidInputError("mesh contains a degenerate triangle (area <= 1e-12)");
        }
        total_area_ += area;
        shortest_edge_ = std::min({shortest_edge_, (b - a).norm(), (c - b).norm(), (a - c).norm()});
    }
    if (faces_.empty()) shortest_edge_ = 0.0;

    for (const auto& v : vertices_) bounds_.expand(v);

    // Ritter bounding sphere.
    if (!vertices_.empty()) {
        const Vec3& p0 = vertices_.front();
        std::size_t ia = 0;
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            if ((vertices_[i] - p0).squaredNorm() > (vertices_[ia] - p0).squaredNorm()) ia = i;
        }
        std::size_t ib = ia;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if ((vertices_[i] - vertices_[ia]).squaredNorm() >
                (vertices_[ib] - vertices_[ia]).squaredNorm()) {
                ib = i;
            }
        }
        sphere_center_ = 0.5 * (vertices_[ia] + vertices_[ib]);
        sphere_radius_ = 0.5 * (vertices_[ia] - vertices_[ib]).norm();
        for (const auto& v : vertices_) {
            const double d = (v - sphere_center_).norm();
            if (d > sphere_radius_) {
                const double r = 0.5 * (sphere_radius_ + d);
                sphere_center_ += (v - sphere_center_) * ((d - r) / d);
                sphere_radius_ = r;
            }
        }
    }

    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const auto& v : vertices_) {
        const double coords[3] = {v.x(), v.y(), v.z()};
        h = fnv1a(coords, sizeof(coords), h);
    }
    for (const auto& f : faces_) h = fnv1a(f.data(), sizeof(int) * 3, h);
    content_hash_ = h;

    build_bvh();
}

Vec3 TriMesh::face_normal(int face) const {
    const auto& f = faces_[static_cast<std::size_t>(face)];
    const Vec3& a = vertices_[static_cast<std::size_t>(f[0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(f[1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(f[2])];
    return (b - a).cross(c - a).normalized();
}

double TriMesh::face_area(int face) const {
    const auto& f = faces_[static_cast<std::size_t>(face)];
    const Vec3& a = vertices_[static_cast<std::size_t>(f[0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(f[1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(f[2])];
    return 0.5 * (b - a).cross(c - a).norm();
}

void TriMesh::build_bvh() {
    const std::size_t nf = faces_.size();
    bvh_order_.resize(nf);
    std::iota(bvh_order_.begin(), bvh_order_.end(), 0);
    if (nf == 0) return;

    std::vector<Vec3> centroids(nf);
    std::vector<Aabb> tri_boxes(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        Aabb box;
        for (int c = 0; c < 3; ++c) box.expand(triangle_vertex(static_cast<int>(i), c));
        tri_boxes[i] = box;
        centroids[i] = box.center();
    }

    bvh_nodes_.reserve(2 * nf);
    struct Range {
        std::int32_t node;
        std::int32_t begin;
        std::int32_t end;
    };
    bvh_nodes_.push_back({});
    std::vector<Range> stack{{0, 0, static_cast<std::int32_t>(nf)}};
    constexpr std::int32_t kLeafSize = 2;
    while (!stack.empty()) {
        const Range r = stack.back();
        stack.pop_back();
        Aabb box;
        for (std::int32_t i = r.begin; i < r.end; ++i)
            box.expand(tri_boxes[static_cast<std::size_t>(bvh_order_[static_cast<std::size_t>(i)])]);
        BvhNode& node = bvh_nodes_[static_cast<std::size_t>(r.node)];
        node.box = box;
        if (r.end - r.begin <= kLeafSize) {
            node.begin = r.begin;
            node.count = r.end - r.begin;
            continue;
        }
        int axis = 0;
        const Vec3 ext = box.extent();
        if (ext.y() > ext.x()) axis = 1;
        if (ext.z() > ext[axis]) axis = 2;
        const std::int32_t mid = (r.begin + r.end) / 2;
        std::nth_element(bvh_order_.begin() + r.begin, bvh_order_.begin() + mid,
                         bvh_order_.begin() + r.end, [&](std::int32_t a, std::int32_t b) {
                             const double ca = centroids[static_cast<std::size_t>(a)][axis];
                             const double cb = centroids[static_cast<std::size_t>(b)][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        const auto left = static_cast<std::int32_t>(bvh_nodes_.size());
        bvh_nodes_.push_back({});
        bvh_nodes_.push_back({});
        bvh_nodes_[static_cast<std::size_t>(r.node)].left = left;
        bvh_nodes_[static_cast<std::size_t>(r.node)].right = left + 1;
        stack.push_back({left, r.begin, mid});
        stack.push_back({left + 1, mid, r.end});
    }
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open OBJ file: " + path);
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            double x = 0.0, y = 0.0, z = 0.0;
            if (!(ss >> x >> y >> z)) {
                throw InvalidInputError("bad vertex at " + path + ":" + std::to_string(line_no));
            }
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // accept "i", "i/t", "i//n", "i/t/n"
                const std::size_t slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (const std::exception&) {
                    throw InvalidInputError("bad face token at " + path + ":" + std::to_string(line_no));
                }
                if (i < 0) i = static_cast<int>(vertices.size()) + i + 1; // negative = relative
                idx.push_back(i - 1);
            }
            if (idx.size() != 3) {
                throw InvalidInputError("non-triangular face at " + path + ":" +
                                        std::to_string(line_no));
            }
            faces.push_back({idx[0], idx[1], idx[2]});
        }
        // everything else (vn, vt, comments, groups) is ignored
    }
    return TriMesh(std::move(vertices), std::move(faces));
}

void save_obj(const std::string& path, const TriMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write OBJ file: " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices()) {
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const auto& f : mesh.faces()) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
}

TriMesh make_box(double sx, double sy, double sz) {
    if (sx <= 0.0 || sy <= 0.0 || sz <= 0.0) throw InvalidInputError("box extents must be positive");
    const double x = 0.5 * sx, y = 0.5 * sy, z = 0.5 * sz;
    std::vector<Vec3> v = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                           {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
    // CCW as seen from outside.
    std::vector<std::array<int, 3>> f = {
        {0, 2, 1}, {0, 3, 2}, // bottom (-z)
        {4, 5, 6}, {4, 6, 7}, // top (+z)
        {0, 1, 5}, {0, 5, 4}, // -y
        {2, 3, 7}, {2, 7, 6}, // +y
        {1, 2, 6}, {1, 6, 5}, // +x
        {3, 0, 4}, {3, 4, 7}, // -x
    };
    return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(double radius, int subdivisions) {
    if (radius <= 0.0) throw InvalidInputError("sphere radius must be positive");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                           {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                           {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(v.size());
            v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const int ab = mid(tri[0], tri[1]);
            const int bc = mid(tri[1], tri[2]);
            const int ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p *= radius;
    return TriMesh(std::move(v), std::move(f));
}

TriMesh merge_meshes(const std::vector<TriMesh>& parts) {
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    for (const auto& m : parts) {
        const int base = static_cast<int>(v.size());
        v.insert(v.end(), m.vertices().begin(), m.vertices().end());
        for (const auto& face : m.faces()) {
            f.push_back({face[0] + base, face[1] + base, face[2] + base});
        }
    }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh recenter(const TriMesh& mesh, const Vec3& new_origin) {
    std::vector<Vec3> v = mesh.vertices();
    for (auto& p : v) p -= new_origin;
    return TriMesh(std::move(v), mesh.faces());
}

} // namespace asp::geom
