#pragma once

#include <array>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "mfe/common.hpp"

namespace mfe {

// ---------------------------------------------------------------------------
// Boundary curves and domain specifications
// ---------------------------------------------------------------------------

struct DiskCurve {
    Vec2 center;
    double radius = 1.0;
};

// Centered at the origin, axes along the coordinate directions.
struct EllipseCurve {
    double a = 1.0;
    double b = 1.0;
};

// Centered at the origin.
struct RectangleCurve {
    double width = 1.0;
    double height = 1.0;
};

// Simple closed polygon; stored counterclockwise.
struct PolygonCurve {
    std::vector<Vec2> vertices;
};

using BoundaryCurve = std::variant<DiskCurve, EllipseCurve, RectangleCurve, PolygonCurve>;

struct DomainSpec {
    BoundaryCurve outer;
    std::vector<BoundaryCurve> holes;

    bool multiply_connected() const { return !holes.empty(); }
    // The simply-connected fill (all holes dropped).
    DomainSpec fill() const { return DomainSpec{outer, {}}; }
    // Throws InvalidDomain if a hole exits the outer region or holes overlap.
    void validate() const;
};

// Curve primitives.
bool curve_contains(const BoundaryCurve& c, const Vec2& p);
double curve_distance(const BoundaryCurve& c, const Vec2& p);
Vec2 curve_project(const BoundaryCurve& c, const Vec2& p);
double curve_area(const BoundaryCurve& c);
double curve_arc_length(const BoundaryCurve& c);
// Positive ray parameters t with q + t*dir on the curve, ascending.
void curve_ray_hits(const BoundaryCurve& c, const Vec2& q, const Vec2& dir,
                    std::vector<double>& out);
// Directions (as angles at q) where the per-ray hit structure can kink.
void curve_breakpoint_angles(const BoundaryCurve& c, const Vec2& q, std::vector<double>& out);
// Closed sample loop at local spacing <= h(x); first point not repeated.
std::vector<Vec2> curve_sample(const BoundaryCurve& c,
                               const std::function<double(const Vec2&)>& h);

bool domain_contains(const DomainSpec& spec, const Vec2& p);
double domain_boundary_distance(const DomainSpec& spec, const Vec2& p);
double domain_area(const DomainSpec& spec);
double domain_diameter(const DomainSpec& spec);
void domain_bbox(const DomainSpec& spec, Vec2& lo, Vec2& hi);

// ---------------------------------------------------------------------------
// Mesh and nodal fields
// ---------------------------------------------------------------------------

// Node markers: -1 interior, 0 outer boundary, 1 + k for hole k.
constexpr int kInterior = -1;
constexpr int kOuter = 0;

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;  // CCW node indices
    std::vector<int> marker;                    // per node
    double target_h = 0.0;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    bool is_boundary(int i) const { return marker[i] >= 0; }
    double tri_area(int t) const {
        const auto& tr = triangles[t];
        return 0.5 * (nodes[tr[1]] - nodes[tr[0]]).cross(nodes[tr[2]] - nodes[tr[0]]);
    }
    double diameter() const;
    // Hop distance to the nearest boundary node, capped at `cap`.
    std::vector<int> boundary_hops(int cap) const;
};

struct ScalarField {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Mesh& m, double fill = 0.0)
        : mesh(&m), values(m.nodes.size(), fill) {}

    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }
    double min() const;
    double max() const;
};

// Optional focal grading for triangulate(): element size grows linearly with
// the distance from `center`, from h_min up to the global target_h.
struct FocalGrade {
    Vec2 center;
    double h_min = 0.0;
    double growth = 0.3;
};

Mesh triangulate(const DomainSpec& spec, double target_h,
                 const std::optional<FocalGrade>& grade = std::nullopt);

// Composite per-triangle quadrature (degree-4 rule), compensated summation.
double integrate(const Mesh& mesh, const std::function<double(const Vec2&)>& f);
double integrate(const Mesh& mesh, const ScalarField& field,
                 const std::function<double(const Vec2&, double)>& f);

// Returns log( integral of exp(w) ) with a global max shift, for nodal fields
// w that may exceed the range of exp.
double log_integral_exp(const Mesh& mesh, const ScalarField& w);

// Point location with barycentric interpolation.
class MeshLocator {
public:
    explicit MeshLocator(const Mesh& mesh);

    // Triangle containing p (barycentric coords in `bary`), or -1.
    int locate(const Vec2& p, std::array<double, 3>* bary = nullptr) const;
    double interpolate(const ScalarField& f, const Vec2& p) const;

private:
    const Mesh& mesh_;
    Vec2 lo_, hi_;
    int nx_ = 0, ny_ = 0;
    double cell_ = 0.0;
    std::vector<std::vector<int>> bins_;
};

// ---------------------------------------------------------------------------
// Ray-based polar integration about an interior point
// ---------------------------------------------------------------------------

// Visits every maximal radial interval (a, b) of { r > rmin : q + r e_theta in
// Omega } for a composite Gauss rule in theta split at breakpoint directions.
// The callback receives (theta, gauss weight in theta, a, b).
void for_each_ray_interval(const DomainSpec& spec, const Vec2& q, double rmin,
                           int nodes_per_arc, int min_arcs,
                           const std::function<void(double, double, double, double)>& cb);

// integral over Omega \ B(q, rmin) of f(x) / |x-q|^4 dx. `f` is sampled at
// Gauss nodes of the substitution u = 1/(2 r^2), which clusters them at the
// inner radius where the kernel peaks.
double radial_quartic_integral(const DomainSpec& spec, const Vec2& q, double rmin,
                               const std::function<double(const Vec2&)>& f,
                               int radial_nodes = 20, int rays = 512);

// integral over Omega \ B(q, rmin) of |x-q|^{-p} dx for p in {2, 4}, with the
// radial part integrated exactly along every ray.
double radial_power_integral(const DomainSpec& spec, const Vec2& q, double rmin, int p,
                             int rays = 2048);

// integral over Omega^c of |x-q|^{-4} dx, via pi/delta^2 minus the domain part
// (exact in r along rays). Requires closure of B(q, delta) inside Omega.
double exterior_inverse_quartic(const DomainSpec& spec, const Vec2& q, double delta);

}  // namespace mfe
