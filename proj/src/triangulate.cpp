#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mfe/geometry.hpp"

namespace mfe {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Incremental Delaunay triangulation (Bowyer-Watson) with a super triangle.
// Predicates in long double; cocircular ties resolve to "not inside", which
// keeps boundary rings (exactly cocircular on disks) stable.
class Delaunay {
public:
    explicit Delaunay(const std::vector<Vec2>& pts) : pts_(pts) {}

    bool run() {
        Vec2 lo = pts_[0], hi = pts_[0];
        for (const Vec2& p : pts_) {
            lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
        }
        Vec2 c = 0.5 * (lo + hi);
        double R = std::max(hi.x - lo.x, hi.y - lo.y) * 16.0 + 1.0;
        int n = static_cast<int>(pts_.size());
        all_.assign(pts_.begin(), pts_.end());
        all_.push_back({c.x - 2 * R, c.y - R});
        all_.push_back({c.x + 2 * R, c.y - R});
        all_.push_back({c.x, c.y + 2 * R});
        tri_.clear(); adj_.clear(); alive_.clear();
        add_tri(n, n + 1, n + 2, -1, -1, -1);
        last_ = 0;
        for (int i = 0; i < n; ++i)
            if (!insert(i)) return false;
        return true;
    }

    // Alive triangles made of real points only, CCW.
    std::vector<std::array<int, 3>> extract() const {
        int n = static_cast<int>(pts_.size());
        std::vector<std::array<int, 3>> out;
        for (size_t t = 0; t < tri_.size(); ++t) {
            if (!alive_[t]) continue;
            const auto& tr = tri_[t];
            if (tr[0] >= n || tr[1] >= n || tr[2] >= n) continue;
            out.push_back(tr);
        }
        return out;
    }

private:
    using Tri = std::array<int, 3>;

    const std::vector<Vec2>& pts_;
    std::vector<Vec2> all_;
    std::vector<Tri> tri_;
    std::vector<Tri> adj_;  // neighbor across edge opposite vertex k
    std::vector<char> alive_;
    int last_ = 0;

    int add_tri(int a, int b, int c, int na, int nb, int nc) {
        tri_.push_back({a, b, c});
        adj_.push_back({na, nb, nc});
        alive_.push_back(1);
        return static_cast<int>(tri_.size()) - 1;
    }

    static long double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
        long double abx = (long double)b.x - a.x, aby = (long double)b.y - a.y;
        long double acx = (long double)c.x - a.x, acy = (long double)c.y - a.y;
        return abx * acy - aby * acx;
    }

    bool in_circumcircle(int t, const Vec2& p) const {
        const Vec2& a = all_[tri_[t][0]];
        const Vec2& b = all_[tri_[t][1]];
        const Vec2& c = all_[tri_[t][2]];
        long double ax = a.x - p.x, ay = a.y - p.y;
        long double bx = b.x - p.x, by = b.y - p.y;
        long double cx = c.x - p.x, cy = c.y - p.y;
        long double det = (ax * ax + ay * ay) * (bx * cy - by * cx) -
                          (bx * bx + by * by) * (ax * cy - ay * cx) +
                          (cx * cx + cy * cy) * (ax * by - ay * bx);
        return det > 0;
    }

    int locate(const Vec2& p) const {
        int t = last_;
        if (t < 0 || t >= (int)tri_.size() || !alive_[t]) {
            t = -1;
            for (int i = static_cast<int>(tri_.size()) - 1; i >= 0; --i)
                if (alive_[i]) { t = i; break; }
        }
        int steps = 0, cap = static_cast<int>(tri_.size()) + 16;
        while (steps++ < cap) {
            const Tri& tr = tri_[t];
            int worst = -1;
            long double worst_val = -1e-30L;
            for (int e = 0; e < 3; ++e) {
                const Vec2& u = all_[tr[(e + 1) % 3]];
                const Vec2& v = all_[tr[(e + 2) % 3]];
                long double o = orient(u, v, p);
                if (o < worst_val) { worst_val = o; worst = e; }
            }
            if (worst < 0) return t;
            int nb = adj_[t][worst];
            if (nb < 0) return t;
            t = nb;
        }
        // Walk cycled (numerically degenerate spot): linear fallback.
        for (int i = 0; i < (int)tri_.size(); ++i) {
            if (!alive_[i]) continue;
            const Tri& tr = tri_[i];
            bool ok = true;
            for (int e = 0; e < 3 && ok; ++e)
                ok = orient(all_[tr[(e + 1) % 3]], all_[tr[(e + 2) % 3]], p) >= -1e-18L;
            if (ok) return i;
        }
        return -1;
    }

    bool insert(int pi) {
        const Vec2& p = all_[pi];
        int t0 = locate(p);
        if (t0 < 0) return false;
        if (!in_circumcircle(t0, p)) {
            // Tolerate a located triangle that fails the strict test (point on
            // an edge of a nearly degenerate pair): scan its neighbors.
            bool found = false;
            for (int e = 0; e < 3 && !found; ++e) {
                int nb = adj_[t0][e];
                if (nb >= 0 && in_circumcircle(nb, p)) { t0 = nb; found = true; }
            }
            if (!found) return false;
        }
        // Grow the cavity of triangles whose circumcircle contains p.
        std::vector<int> bad, stack{t0};
        std::vector<char> seen(tri_.size(), 0);
        seen[t0] = 1;
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            bad.push_back(t);
            for (int e = 0; e < 3; ++e) {
                int nb = adj_[t][e];
                if (nb < 0 || seen[nb]) continue;
                if (in_circumcircle(nb, p)) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        // Cavity boundary (directed edges u->v with the outside on the left).
        struct BEdge { int u, v, outer; };
        std::vector<BEdge> border;
        for (int t : bad) {
            for (int e = 0; e < 3; ++e) {
                int nb = adj_[t][e];
                if (nb >= 0 && seen[nb]) continue;
                border.push_back({tri_[t][(e + 1) % 3], tri_[t][(e + 2) % 3], nb});
            }
        }
        for (int t : bad) alive_[t] = 0;
        // Fan the cavity from p.
        std::vector<int> created;
        created.reserve(border.size());
        for (const BEdge& be : border) {
            if (orient(all_[be.u], all_[be.v], p) <= 0) return false;
            int nt = add_tri(be.u, be.v, pi, -1, -1, -1);
            adj_[nt][2] = be.outer;
            if (be.outer >= 0) {
                for (int e = 0; e < 3; ++e) {
                    int a = tri_[be.outer][(e + 1) % 3], b = tri_[be.outer][(e + 2) % 3];
                    if (a == be.v && b == be.u) adj_[be.outer][e] = nt;
                }
            }
            created.push_back(nt);
        }
        // Link fan neighbors: the triangle with base (u,v) meets the one with
        // base (v,w) along edge (v,p); that edge is opposite vertex 0 in the
        // first and opposite vertex 1 in the second.
        std::unordered_map<int, int> start_at;
        start_at.reserve(created.size() * 2);
        for (int nt : created) start_at[tri_[nt][0]] = nt;
        for (int nt : created) {
            int v = tri_[nt][1];
            auto it = start_at.find(v);
            if (it == start_at.end()) return false;
            adj_[nt][0] = it->second;
            adj_[it->second][1] = nt;
        }
        last_ = created.empty() ? last_ : created.front();
        return true;
    }
};

struct SizeField {
    double h0;
    std::optional<FocalGrade> grade;

    double operator()(const Vec2& p) const {
        if (!grade) return h0;
        double h = grade->h_min + grade->growth * dist(p, grade->center);
        return std::clamp(h, grade->h_min, h0);
    }
};

}  // namespace

double Mesh::diameter() const {
    Vec2 lo = nodes[0], hi = nodes[0];
    for (const Vec2& p : nodes) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
    }
    return dist(lo, hi);
}

std::vector<int> Mesh::boundary_hops(int cap) const {
    std::vector<int> hops(nodes.size(), cap);
    std::vector<int> frontier;
    for (int i = 0; i < n_nodes(); ++i)
        if (is_boundary(i)) { hops[i] = 0; frontier.push_back(i); }
    std::vector<std::vector<int>> nbr(nodes.size());
    for (const auto& tr : triangles)
        for (int e = 0; e < 3; ++e) {
            nbr[tr[e]].push_back(tr[(e + 1) % 3]);
            nbr[tr[e]].push_back(tr[(e + 2) % 3]);
        }
    for (int level = 1; level < cap && !frontier.empty(); ++level) {
        std::vector<int> next;
        for (int i : frontier)
            for (int j : nbr[i])
                if (hops[j] > level) { hops[j] = level; next.push_back(j); }
        frontier.swap(next);
    }
    return hops;
}

double ScalarField::min() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
}

double ScalarField::max() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
}

Mesh triangulate(const DomainSpec& spec, double target_h, const std::optional<FocalGrade>& grade) {
    spec.validate();
    double diam = domain_diameter(spec);
    if (!(target_h > 0.0) || target_h >= diam / 4.0)
        throw Error(ErrorKind::InvalidDomain, "target_h must be positive and < diameter/4");

    SizeField hf{target_h, grade};
    auto hfun = [&hf](const Vec2& p) { return hf(p); };

    // Boundary loops: outer first, then each hole.
    std::vector<std::vector<Vec2>> loops;
    loops.push_back(curve_sample(spec.outer, hfun));
    for (const auto& hole : spec.holes) loops.push_back(curve_sample(hole, hfun));

    Vec2 lo, hi;
    domain_bbox(spec, lo, hi);

    for (int attempt = 0; attempt < 4; ++attempt) {
        std::vector<Vec2> pts;
        std::vector<int> marker;
        std::vector<std::pair<int, int>> loop_range;
        for (size_t L = 0; L < loops.size(); ++L) {
            loop_range.push_back({(int)pts.size(), (int)(pts.size() + loops[L].size())});
            for (const Vec2& p : loops[L]) {
                pts.push_back(p);
                marker.push_back(static_cast<int>(L));  // 0 outer, 1+k hole k
            }
        }
        int n_boundary = static_cast<int>(pts.size());

        // Focal rings around the grading center.
        double ring_edge = 0.0;
        if (grade) {
            const FocalGrade& g = *grade;
            if (domain_contains(spec, g.center) &&
                domain_boundary_distance(spec, g.center) > 3.0 * g.h_min) {
                pts.push_back(g.center);
                marker.push_back(kInterior);
                double r = g.h_min;
                int k = 0;
                double r_stop = (target_h - g.h_min) / std::max(g.growth, 1e-9);
                while (r < r_stop) {
                    double hloc = hf({g.center.x + r, g.center.y});
                    int m = std::max<int>(6, (int)std::llround(2 * kPi * r / hloc));
                    double off = 0.5 * (k % 2) * 2 * kPi / m;
                    for (int i = 0; i < m; ++i) {
                        double a = 2 * kPi * i / m + off;
                        Vec2 p{g.center.x + r * std::cos(a), g.center.y + r * std::sin(a)};
                        if (domain_contains(spec, p) &&
                            domain_boundary_distance(spec, p) >= 0.55 * hf(p)) {
                            pts.push_back(p);
                            marker.push_back(kInterior);
                        }
                    }
                    r += hloc;
                    ++k;
                }
                ring_edge = r;
            }
        }

        // Hexagonal lattice at the base spacing, jittered deterministically.
        double dy = target_h * std::sqrt(3.0) / 2.0;
        int rows = static_cast<int>((hi.y - lo.y) / dy) + 2;
        int cols = static_cast<int>((hi.x - lo.x) / target_h) + 2;
        std::uint64_t seed = 0x5eedf00d + 7919ull * attempt;
        for (int r = 0; r <= rows; ++r) {
            double y = lo.y + r * dy;
            double xoff = (r % 2) ? 0.5 * target_h : 0.0;
            for (int c = 0; c <= cols; ++c) {
                double x = lo.x + xoff + c * target_h;
                std::uint64_t hsh = splitmix64(seed ^ (static_cast<std::uint64_t>(r) << 32 | c));
                double jx = (unit_double(hsh) - 0.5) * 0.08 * target_h;
                double jy = (unit_double(splitmix64(hsh)) - 0.5) * 0.08 * target_h;
                Vec2 p{x + jx, y + jy};
                if (!domain_contains(spec, p)) continue;
                if (domain_boundary_distance(spec, p) < 0.55 * target_h) continue;
                if (grade && dist(p, grade->center) < ring_edge + 0.65 * target_h) continue;
                pts.push_back(p);
                marker.push_back(kInterior);
            }
        }

        Delaunay dt(pts);
        if (!dt.run()) continue;
        auto tris = dt.extract();

        // Keep triangles whose centroid lies in the domain.
        std::vector<std::array<int, 3>> kept;
        kept.reserve(tris.size());
        bool degenerate = false;
        for (auto& tr : tris) {
            Vec2 cen = (pts[tr[0]] + pts[tr[1]] + pts[tr[2]]) / 3.0;
            if (!domain_contains(spec, cen)) continue;
            double area = 0.5 * (pts[tr[1]] - pts[tr[0]]).cross(pts[tr[2]] - pts[tr[0]]);
            if (area < 0) { std::swap(tr[1], tr[2]); area = -area; }
            if (area <= 1e-14 * target_h * target_h) { degenerate = true; break; }
            kept.push_back(tr);
        }
        if (degenerate || kept.empty()) continue;

        // Conformity along every boundary loop: consecutive samples must be a
        // mesh edge of some kept triangle.
        std::unordered_map<long long, int> edges;
        long long N = static_cast<long long>(pts.size());
        for (const auto& tr : kept)
            for (int e = 0; e < 3; ++e) {
                int a = tr[(e + 1) % 3], b = tr[(e + 2) % 3];
                long long key = std::min(a, b) * N + std::max(a, b);
                edges[key]++;
            }
        bool conforming = true;
        for (const auto& [b0, b1] : loop_range) {
            int m = b1 - b0;
            for (int i = 0; i < m && conforming; ++i) {
                int a = b0 + i, b = b0 + (i + 1) % m;
                conforming = edges.count(std::min(a, b) * N + std::max(a, b)) > 0;
            }
        }
        if (!conforming) continue;

        // Compact node list: only referenced nodes survive.
        std::vector<int> remap(pts.size(), -1);
        Mesh mesh;
        mesh.target_h = target_h;
        for (int i = 0; i < n_boundary; ++i) {
            remap[i] = mesh.n_nodes();
            mesh.nodes.push_back(pts[i]);
            mesh.marker.push_back(marker[i]);
        }
        std::vector<char> used(pts.size(), 0);
        for (const auto& tr : kept)
            for (int v : tr) used[v] = 1;
        for (size_t i = n_boundary; i < pts.size(); ++i) {
            if (!used[i]) continue;
            remap[i] = mesh.n_nodes();
            mesh.nodes.push_back(pts[i]);
            mesh.marker.push_back(kInterior);
        }
        for (const auto& tr : kept)
            mesh.triangles.push_back({remap[tr[0]], remap[tr[1]], remap[tr[2]]});
        std::sort(mesh.triangles.begin(), mesh.triangles.end());
        return mesh;
    }
    throw Error(ErrorKind::MeshFailure, "triangulation failed after retries");
}

}  // namespace mfe
