#include <algorithm>
#include <cmath>

#include "mfe/geometry.hpp"

namespace mfe {

namespace {

constexpr double kPi = 3.14159265358979323846;

double seg_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
    Vec2 ab = b - a;
    double t = ab.norm2() > 0 ? (p - a).dot(ab) / ab.norm2() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + t * ab);
}

Vec2 seg_project(const Vec2& a, const Vec2& b, const Vec2& p) {
    Vec2 ab = b - a;
    double t = ab.norm2() > 0 ? (p - a).dot(ab) / ab.norm2() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * ab;
}

// Hits of q + t*dir against segment [a,b], appended to out.
void seg_ray_hits(const Vec2& a, const Vec2& b, const Vec2& q, const Vec2& dir,
                  std::vector<double>& out) {
    Vec2 ab = b - a;
    double den = dir.cross(ab);
    if (std::abs(den) < 1e-300) return;
    Vec2 aq = a - q;
    double t = aq.cross(ab) / den;
    double s = aq.cross(dir) / den;
    if (t > 0 && s >= 0.0 && s < 1.0) out.push_back(t);
}

std::vector<Vec2> rect_vertices(const RectangleCurve& r) {
    double w = 0.5 * r.width, h = 0.5 * r.height;
    return {{-w, -h}, {w, -h}, {w, h}, {-w, h}};
}

double polygon_signed_area(const std::vector<Vec2>& v) {
    KahanSum s;
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        s.add(a.cross(b));
    }
    return 0.5 * s.value();
}

bool polygon_contains(const std::vector<Vec2>& v, const Vec2& p) {
    // Crossing parity with a horizontal ray.
    bool in = false;
    for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        bool cross = ((v[i].y > p.y) != (v[j].y > p.y)) &&
                     (p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x);
        if (cross) in = !in;
    }
    return in;
}

// Circle hits for q + t*dir with |dir| = 1.
void circle_ray_hits(const Vec2& c, double R, const Vec2& q, const Vec2& dir,
                     std::vector<double>& out) {
    Vec2 m = q - c;
    double b = m.dot(dir);
    double disc = b * b - (m.norm2() - R * R);
    if (disc <= 0) return;
    double sq = std::sqrt(disc);
    if (-b - sq > 0) out.push_back(-b - sq);
    if (-b + sq > 0) out.push_back(-b + sq);
}

// Ellipse sampled through the scaled circle x/a, y/b.
void ellipse_ray_hits(const EllipseCurve& e, const Vec2& q, const Vec2& dir,
                      std::vector<double>& out) {
    Vec2 q2{q.x / e.a, q.y / e.b};
    Vec2 d2{dir.x / e.a, dir.y / e.b};
    double A = d2.norm2();
    double B = q2.dot(d2);
    double C = q2.norm2() - 1.0;
    double disc = B * B - A * C;
    if (disc <= 0) return;
    double sq = std::sqrt(disc);
    double t1 = (-B - sq) / A, t2 = (-B + sq) / A;
    if (t1 > 0) out.push_back(t1);
    if (t2 > 0) out.push_back(t2);
}

}  // namespace

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidDomain: return "InvalidDomain";
        case ErrorKind::MeshFailure: return "MeshFailure";
        case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
        case ErrorKind::DeltaTooLarge: return "DeltaTooLarge";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::SourceTooCloseToBoundary: return "SourceTooCloseToBoundary";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotCritical: return "NotCritical";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::InsufficientTail: return "InsufficientTail";
        case ErrorKind::BallDoesNotFit: return "BallDoesNotFit";
        case ErrorKind::DegenerateThreshold: return "DegenerateThreshold";
        case ErrorKind::EmptyPositivePart: return "EmptyPositivePart";
        case ErrorKind::EmptyBranch: return "EmptyBranch";
        case ErrorKind::TableTooSmall: return "TableTooSmall";
        case ErrorKind::MaximizerOnBoundaryRing: return "MaximizerOnBoundaryRing";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::IoFailure: return "IoFailure";
    }
    return "Error";
}

bool curve_contains(const BoundaryCurve& c, const Vec2& p) {
    return std::visit(
        [&p](const auto& cc) -> bool {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                return dist(p, cc.center) < cc.radius;
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                double u = p.x / cc.a, v = p.y / cc.b;
                return u * u + v * v < 1.0;
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                return std::abs(p.x) < 0.5 * cc.width && std::abs(p.y) < 0.5 * cc.height;
            } else {
                return polygon_contains(cc.vertices, p);
            }
        },
        c);
}

double curve_distance(const BoundaryCurve& c, const Vec2& p) {
    return std::visit(
        [&p](const auto& cc) -> double {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                return std::abs(dist(p, cc.center) - cc.radius);
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                // Dense polyline fallback; exact enough for mesh margins.
                double best = 1e300;
                int n = 512;
                for (int i = 0; i <= n; ++i) {
                    double t0 = 2 * kPi * i / n, t1 = 2 * kPi * (i + 1) / n;
                    best = std::min(best, seg_distance({cc.a * std::cos(t0), cc.b * std::sin(t0)},
                                                       {cc.a * std::cos(t1), cc.b * std::sin(t1)}, p));
                }
                return best;
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                auto v = rect_vertices(cc);
                double best = 1e300;
                for (int i = 0; i < 4; ++i) best = std::min(best, seg_distance(v[i], v[(i + 1) % 4], p));
                return best;
            } else {
                double best = 1e300;
                const auto& v = cc.vertices;
                for (size_t i = 0; i < v.size(); ++i)
                    best = std::min(best, seg_distance(v[i], v[(i + 1) % v.size()], p));
                return best;
            }
        },
        c);
}

Vec2 curve_project(const BoundaryCurve& c, const Vec2& p) {
    return std::visit(
        [&p](const auto& cc) -> Vec2 {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                Vec2 d = p - cc.center;
                double n = d.norm();
                if (n == 0) return cc.center + Vec2{cc.radius, 0};
                return cc.center + d * (cc.radius / n);
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                double t = std::atan2(p.y / cc.b, p.x / cc.a);
                return {cc.a * std::cos(t), cc.b * std::sin(t)};
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                auto v = rect_vertices(cc);
                Vec2 best;
                double bd = 1e300;
                for (int i = 0; i < 4; ++i) {
                    Vec2 pr = seg_project(v[i], v[(i + 1) % 4], p);
                    if (dist(pr, p) < bd) { bd = dist(pr, p); best = pr; }
                }
                return best;
            } else {
                const auto& v = cc.vertices;
                Vec2 best;
                double bd = 1e300;
                for (size_t i = 0; i < v.size(); ++i) {
                    Vec2 pr = seg_project(v[i], v[(i + 1) % v.size()], p);
                    if (dist(pr, p) < bd) { bd = dist(pr, p); best = pr; }
                }
                return best;
            }
        },
        c);
}

double curve_area(const BoundaryCurve& c) {
    return std::visit(
        [](const auto& cc) -> double {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) return kPi * cc.radius * cc.radius;
            else if constexpr (std::is_same_v<T, EllipseCurve>) return kPi * cc.a * cc.b;
            else if constexpr (std::is_same_v<T, RectangleCurve>) return cc.width * cc.height;
            else return std::abs(polygon_signed_area(cc.vertices));
        },
        c);
}

double curve_arc_length(const BoundaryCurve& c) {
    return std::visit(
        [](const auto& cc) -> double {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) return 2 * kPi * cc.radius;
            else if constexpr (std::is_same_v<T, EllipseCurve>) {
                double len = 0;
                int n = 4096;
                Vec2 prev{cc.a, 0};
                for (int i = 1; i <= n; ++i) {
                    double t = 2 * kPi * i / n;
                    Vec2 cur{cc.a * std::cos(t), cc.b * std::sin(t)};
                    len += dist(prev, cur);
                    prev = cur;
                }
                return len;
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                return 2 * (cc.width + cc.height);
            } else {
                double len = 0;
                const auto& v = cc.vertices;
                for (size_t i = 0; i < v.size(); ++i) len += dist(v[i], v[(i + 1) % v.size()]);
                return len;
            }
        },
        c);
}

void curve_ray_hits(const BoundaryCurve& c, const Vec2& q, const Vec2& dir,
                    std::vector<double>& out) {
    std::visit(
        [&](const auto& cc) {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                circle_ray_hits(cc.center, cc.radius, q, dir, out);
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                ellipse_ray_hits(cc, q, dir, out);
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                auto v = rect_vertices(cc);
                for (int i = 0; i < 4; ++i) seg_ray_hits(v[i], v[(i + 1) % 4], q, dir, out);
            } else {
                const auto& v = cc.vertices;
                for (size_t i = 0; i < v.size(); ++i)
                    seg_ray_hits(v[i], v[(i + 1) % v.size()], q, dir, out);
            }
        },
        c);
}

void curve_breakpoint_angles(const BoundaryCurve& c, const Vec2& q, std::vector<double>& out) {
    std::visit(
        [&](const auto& cc) {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                Vec2 d = cc.center - q;
                double L = d.norm();
                if (L > cc.radius) {
                    double phi = std::atan2(d.y, d.x);
                    double half = std::asin(std::min(1.0, cc.radius / L));
                    out.push_back(phi - half);
                    out.push_back(phi + half);
                }
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                // Tangency angles located on the scaled circle.
                int n = 256;
                for (int i = 0; i < n; ++i) {
                    double t = 2 * kPi * i / n;
                    Vec2 p{cc.a * std::cos(t), cc.b * std::sin(t)};
                    out.push_back(std::atan2(p.y - q.y, p.x - q.x));
                }
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                for (const Vec2& v : rect_vertices(cc))
                    out.push_back(std::atan2(v.y - q.y, v.x - q.x));
            } else {
                for (const Vec2& v : cc.vertices)
                    out.push_back(std::atan2(v.y - q.y, v.x - q.x));
            }
        },
        c);
}

std::vector<Vec2> curve_sample(const BoundaryCurve& c,
                               const std::function<double(const Vec2&)>& h) {
    return std::visit(
        [&](const auto& cc) -> std::vector<Vec2> {
            using T = std::decay_t<decltype(cc)>;
            std::vector<Vec2> pts;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                // Uniform angular sampling at the finest local spacing.
                double hmin = 1e300;
                int probe = 128;
                for (int i = 0; i < probe; ++i) {
                    double t = 2 * kPi * i / probe;
                    hmin = std::min(h({cc.center.x + cc.radius * std::cos(t),
                                       cc.center.y + cc.radius * std::sin(t)}), hmin);
                }
                int n = std::max<int>(12, static_cast<int>(std::ceil(2 * kPi * cc.radius / hmin)));
                pts.reserve(n);
                for (int i = 0; i < n; ++i) {
                    double a = 2 * kPi * i / n;
                    pts.push_back({cc.center.x + cc.radius * std::cos(a),
                                   cc.center.y + cc.radius * std::sin(a)});
                }
                return pts;
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                // Cumulative arc length table, then equal arc spacing.
                int n = 8192;
                std::vector<double> s(n + 1, 0.0);
                Vec2 prev{cc.a, 0};
                for (int i = 1; i <= n; ++i) {
                    double t = 2 * kPi * i / n;
                    Vec2 cur{cc.a * std::cos(t), cc.b * std::sin(t)};
                    s[i] = s[i - 1] + dist(prev, cur);
                    prev = cur;
                }
                double total = s[n];
                double hmin = 1e300;
                for (int i = 0; i < 64; ++i) {
                    double t = 2 * kPi * i / 64;
                    hmin = std::min(h({cc.a * std::cos(t), cc.b * std::sin(t)}), hmin);
                }
                int m = std::max<int>(12, static_cast<int>(std::ceil(total / hmin)));
                pts.reserve(m);
                int j = 0;
                for (int i = 0; i < m; ++i) {
                    double target = total * i / m;
                    while (j < n && s[j + 1] < target) ++j;
                    double f = (s[j + 1] > s[j]) ? (target - s[j]) / (s[j + 1] - s[j]) : 0.0;
                    double t = 2 * kPi * (j + f) / n;
                    pts.push_back({cc.a * std::cos(t), cc.b * std::sin(t)});
                }
                return pts;
            } else {
                std::vector<Vec2> verts;
                if constexpr (std::is_same_v<T, RectangleCurve>) verts = rect_vertices(cc);
                else verts = cc.vertices;
                for (size_t i = 0; i < verts.size(); ++i) {
                    Vec2 a = verts[i], b = verts[(i + 1) % verts.size()];
                    double len = dist(a, b);
                    double hl = std::min(h(a), h(b));
                    int m = std::max<int>(1, static_cast<int>(std::ceil(len / hl)));
                    for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (double(k) / m));
                }
                return pts;
            }
        },
        c);
}

bool domain_contains(const DomainSpec& spec, const Vec2& p) {
    if (!curve_contains(spec.outer, p)) return false;
    for (const auto& hcurve : spec.holes)
        if (curve_contains(hcurve, p)) return false;
    return true;
}

double domain_boundary_distance(const DomainSpec& spec, const Vec2& p) {
    double d = curve_distance(spec.outer, p);
    for (const auto& hcurve : spec.holes) d = std::min(d, curve_distance(hcurve, p));
    return d;
}

double domain_area(const DomainSpec& spec) {
    double a = curve_area(spec.outer);
    for (const auto& hcurve : spec.holes) a -= curve_area(hcurve);
    return a;
}

void domain_bbox(const DomainSpec& spec, Vec2& lo, Vec2& hi) {
    std::visit(
        [&](const auto& cc) {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, DiskCurve>) {
                lo = {cc.center.x - cc.radius, cc.center.y - cc.radius};
                hi = {cc.center.x + cc.radius, cc.center.y + cc.radius};
            } else if constexpr (std::is_same_v<T, EllipseCurve>) {
                lo = {-cc.a, -cc.b};
                hi = {cc.a, cc.b};
            } else if constexpr (std::is_same_v<T, RectangleCurve>) {
                lo = {-0.5 * cc.width, -0.5 * cc.height};
                hi = {0.5 * cc.width, 0.5 * cc.height};
            } else {
                lo = hi = cc.vertices.front();
                for (const Vec2& v : cc.vertices) {
                    lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
                    hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
                }
            }
        },
        spec.outer);
}

double domain_diameter(const DomainSpec& spec) {
    Vec2 lo, hi;
    domain_bbox(spec, lo, hi);
    return dist(lo, hi);
}

void DomainSpec::validate() const {
    if (std::holds_alternative<PolygonCurve>(outer) &&
        std::get<PolygonCurve>(outer).vertices.size() < 3)
        throw Error(ErrorKind::InvalidDomain, "outer polygon needs at least 3 vertices");
    auto samples = [](const BoundaryCurve& c) {
        return curve_sample(c, [&c](const Vec2&) { return curve_arc_length(c) / 256.0; });
    };
    for (size_t k = 0; k < holes.size(); ++k) {
        for (const Vec2& p : samples(holes[k])) {
            if (!curve_contains(outer, p))
                throw Error(ErrorKind::InvalidDomain, "hole " + std::to_string(k) + " exits the outer region");
        }
        for (size_t j = 0; j < k; ++j) {
            for (const Vec2& p : samples(holes[k]))
                if (curve_contains(holes[j], p))
                    throw Error(ErrorKind::InvalidDomain, "holes " + std::to_string(j) + " and " +
                                                              std::to_string(k) + " overlap");
            for (const Vec2& p : samples(holes[j]))
                if (curve_contains(holes[k], p))
                    throw Error(ErrorKind::InvalidDomain, "holes " + std::to_string(j) + " and " +
                                                              std::to_string(k) + " overlap");
        }
    }
}

}  // namespace mfe
