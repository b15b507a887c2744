#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mfe/laplace.hpp"

namespace mfe {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Degree-4 rule shared with the quadrature in mesh_ops.
const double kQW[6] = {0.223381589678011, 0.223381589678011, 0.223381589678011,
                       0.109951743655322, 0.109951743655322, 0.109951743655322};
const double kQ1[6] = {0.445948490915965, 0.108103018168070, 0.445948490915965,
                       0.091576213509771, 0.816847572980459, 0.091576213509771};
const double kQ2[6] = {0.445948490915965, 0.445948490915965, 0.108103018168070,
                       0.091576213509771, 0.091576213509771, 0.816847572980459};

using Triplet = Eigen::Triplet<double>;

}  // namespace

SparseOperator assemble_stiffness(const Mesh& mesh) {
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 &a = mesh.nodes[tr[0]], &b = mesh.nodes[tr[1]], &c = mesh.nodes[tr[2]];
        double area2 = (b - a).cross(c - a);
        Vec2 g[3];
        g[0] = Vec2{b.y - c.y, c.x - b.x} / area2;
        g[1] = Vec2{c.y - a.y, a.x - c.x} / area2;
        g[2] = Vec2{a.y - b.y, b.x - a.x} / area2;
        double area = 0.5 * area2;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(tr[i], tr[j], area * g[i].dot(g[j]));
    }
    SparseOperator op;
    op.dimension = mesh.n_nodes();
    op.mat.resize(op.dimension, op.dimension);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    return op;
}

namespace {

template <typename WeightAt>
SparseOperator assemble_mass_impl(const Mesh& mesh, const WeightAt& weight) {
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 &a = mesh.nodes[tr[0]], &b = mesh.nodes[tr[1]], &c = mesh.nodes[tr[2]];
        double area = mesh.tri_area(t);
        double loc[3][3] = {};
        for (int qp = 0; qp < 6; ++qp) {
            double l[3] = {1 - kQ1[qp] - kQ2[qp], kQ1[qp], kQ2[qp]};
            Vec2 p = l[0] * a + l[1] * b + l[2] * c;
            double w = weight(t, p, l) * kQW[qp];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) loc[i][j] += w * l[i] * l[j];
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trips.emplace_back(tr[i], tr[j], area * loc[i][j]);
    }
    SparseOperator op;
    op.dimension = mesh.n_nodes();
    op.mat.resize(op.dimension, op.dimension);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    return op;
}

}  // namespace

SparseOperator assemble_weighted_mass(const Mesh& mesh,
                                      const std::function<double(const Vec2&)>& w) {
    return assemble_mass_impl(mesh, [&](int, const Vec2& p, const double*) { return w(p); });
}

SparseOperator assemble_weighted_mass(const Mesh& mesh, const ScalarField& w) {
    return assemble_mass_impl(mesh, [&](int t, const Vec2&, const double* l) {
        const auto& tr = mesh.triangles[t];
        return l[0] * w[tr[0]] + l[1] * w[tr[1]] + l[2] * w[tr[2]];
    });
}

LaplaceSolver::LaplaceSolver(const Mesh& mesh)
    : mesh_(mesh), A_(assemble_stiffness(mesh)), locator_(mesh) {
    idx_.assign(mesh.n_nodes(), -1);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        if (mesh.is_boundary(i)) boundary_.push_back(i);
        else { idx_[i] = static_cast<int>(interior_.size()); interior_.push_back(i); }
    }
    int nI = static_cast<int>(interior_.size());
    int nB = static_cast<int>(boundary_.size());
    std::vector<int> bidx(mesh.n_nodes(), -1);
    for (int j = 0; j < nB; ++j) bidx[boundary_[j]] = j;

    std::vector<Triplet> tII, tIB;
    for (int col = 0; col < A_.mat.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_.mat, col); it; ++it) {
            int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (idx_[r] >= 0 && idx_[c] >= 0) tII.emplace_back(idx_[r], idx_[c], it.value());
            else if (idx_[r] >= 0 && bidx[c] >= 0) tIB.emplace_back(idx_[r], bidx[c], it.value());
        }
    }
    AII_.resize(nI, nI);
    AII_.setFromTriplets(tII.begin(), tII.end());
    AIB_.resize(nI, nB);
    AIB_.setFromTriplets(tIB.begin(), tIB.end());
    ldlt_.compute(AII_);
    if (ldlt_.info() != Eigen::Success)
        throw Error(ErrorKind::SingularSystem, "stiffness factorization failed (mesh defect?)");
}

Eigen::VectorXd LaplaceSolver::solve_checked(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd u = ldlt_.solve(rhs);
    Eigen::VectorXd r = rhs - AII_ * u;
    double rel = r.norm() / std::max(rhs.norm(), 1e-300);
    if (rel > 1e-12) {
        u += ldlt_.solve(r);
        r = rhs - AII_ * u;
        rel = r.norm() / std::max(rhs.norm(), 1e-300);
    }
    if (rel > 1e-10 && rhs.norm() > 0)
        throw Error(ErrorKind::SingularSystem, "relative residual above 1e-10 after refinement");
    return u;
}

ScalarField LaplaceSolver::solve_dirichlet(const std::vector<double>& boundary_values) const {
    int nB = static_cast<int>(boundary_.size());
    Eigen::VectorXd g(nB);
    for (int j = 0; j < nB; ++j) g[j] = boundary_values[boundary_[j]];
    Eigen::VectorXd uI = solve_checked(-(AIB_ * g));
    ScalarField u(mesh_);
    for (int j = 0; j < nB; ++j) u[boundary_[j]] = g[j];
    for (size_t i = 0; i < interior_.size(); ++i) u[interior_[i]] = uI[i];
    return u;
}

ScalarField LaplaceSolver::solve_dirichlet(const std::function<double(const Vec2&)>& f,
                                           const std::vector<double>& boundary_values) const {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh_.n_nodes());
    for (int t = 0; t < mesh_.n_triangles(); ++t) {
        const auto& tr = mesh_.triangles[t];
        const Vec2 &a = mesh_.nodes[tr[0]], &b = mesh_.nodes[tr[1]], &c = mesh_.nodes[tr[2]];
        double area = mesh_.tri_area(t);
        for (int qp = 0; qp < 6; ++qp) {
            double l[3] = {1 - kQ1[qp] - kQ2[qp], kQ1[qp], kQ2[qp]};
            Vec2 p = l[0] * a + l[1] * b + l[2] * c;
            double w = area * kQW[qp] * f(p);
            for (int i = 0; i < 3; ++i) load[tr[i]] += w * l[i];
        }
    }
    int nB = static_cast<int>(boundary_.size());
    Eigen::VectorXd g(nB);
    for (int j = 0; j < nB; ++j) g[j] = boundary_values[boundary_[j]];
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior_.size()));
    for (size_t i = 0; i < interior_.size(); ++i) rhs[i] = load[interior_[i]];
    rhs -= AIB_ * g;
    Eigen::VectorXd uI = solve_checked(rhs);
    ScalarField u(mesh_);
    for (int j = 0; j < nB; ++j) u[boundary_[j]] = g[j];
    for (size_t i = 0; i < interior_.size(); ++i) u[interior_[i]] = uI[i];
    return u;
}

ScalarField LaplaceSolver::solve_interior_load(const Eigen::VectorXd& load) const {
    return extend_interior(solve_checked(load));
}

Eigen::VectorXd LaplaceSolver::restrict_interior(const ScalarField& u) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(interior_.size()));
    for (size_t i = 0; i < interior_.size(); ++i) v[i] = u[interior_[i]];
    return v;
}

ScalarField LaplaceSolver::extend_interior(const Eigen::VectorXd& v) const {
    ScalarField u(mesh_);
    for (size_t i = 0; i < interior_.size(); ++i) u[interior_[i]] = v[i];
    return u;
}

double LaplaceSolver::min_boundary_distance(const Vec2& q) const {
    double d = 1e300;
    for (int b : boundary_) d = std::min(d, dist(mesh_.nodes[b], q));
    return d;
}

RobinData LaplaceSolver::green_regular(const Vec2& q) const {
    if (min_boundary_distance(q) <= 2.0 * mesh_.target_h)
        throw Error(ErrorKind::SourceTooCloseToBoundary,
                    "source point within two edge lengths of the boundary");
    std::vector<double> g(mesh_.n_nodes(), 0.0);
    for (int b : boundary_) g[b] = std::log(dist(mesh_.nodes[b], q)) / kTwoPi;
    RobinData rd;
    rd.q = q;
    rd.regular_part = solve_dirichlet(g);
    rd.gamma_q = locator_.interpolate(rd.regular_part, q);
    return rd;
}

std::vector<std::pair<Vec2, double>> LaplaceSolver::robin_field(
    const std::vector<Vec2>& points) const {
    std::vector<std::pair<Vec2, double>> out;
    out.reserve(points.size());
    for (const Vec2& p : points) out.push_back({p, green_regular(p).gamma_q});
    return out;
}

ScalarField LaplaceSolver::robin_all_nodes() const {
    // gamma_i = sum_b H[i,b] g_b(x_i), with H the discrete harmonic extension
    // of the boundary nodal hats: one solve per boundary node, columns
    // consumed on the fly.
    ScalarField gamma(mesh_, 0.0);
    int nB = static_cast<int>(boundary_.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nB);
    for (int j = 0; j < nB; ++j) {
        g[j] = 1.0;
        Eigen::VectorXd col = ldlt_.solve(-(AIB_ * g));
        g[j] = 0.0;
        const Vec2& xb = mesh_.nodes[boundary_[j]];
        for (size_t i = 0; i < interior_.size(); ++i) {
            double d = dist(mesh_.nodes[interior_[i]], xb);
            gamma[interior_[i]] += col[i] * std::log(d) / kTwoPi;
        }
    }
    for (int b : boundary_) gamma[b] = -1e30;
    return gamma;
}

std::vector<std::pair<double, ScalarField>> eig_smallest(const Mesh& mesh,
                                                         const SparseOperator& A,
                                                         const SparseOperator& B, int k) {
    std::vector<std::pair<double, ScalarField>> out;
    if (k <= 0) return out;

    std::vector<int> interior;
    std::vector<int> idx(mesh.n_nodes(), -1);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (!mesh.is_boundary(i)) { idx[i] = static_cast<int>(interior.size()); interior.push_back(i); }
    int n = static_cast<int>(interior.size());
    if (n == 0) throw Error(ErrorKind::SingularSystem, "no interior nodes");

    auto restrict_op = [&](const Eigen::SparseMatrix<double>& M) {
        std::vector<Triplet> trips;
        for (int col = 0; col < M.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it) {
                int r = idx[it.row()], c = idx[it.col()];
                if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
            }
        Eigen::SparseMatrix<double> R(n, n);
        R.setFromTriplets(trips.begin(), trips.end());
        return R;
    };
    Eigen::SparseMatrix<double> AII = restrict_op(A.mat);
    Eigen::SparseMatrix<double> BII = restrict_op(B.mat);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AII);
    if (ldlt.info() != Eigen::Success)
        throw Error(ErrorKind::SingularSystem, "A not factorizable (positive definite required)");

    int m = std::min(n, std::max(2 * k + 4, 8));
    // Renumbering-invariant start block: fixed functions of position.
    Eigen::MatrixXd X(n, m);
    for (int i = 0; i < n; ++i) {
        const Vec2 p = mesh.nodes[interior[i]];
        double vals[16] = {1.0, p.x, p.y, p.x * p.y, p.x * p.x - p.y * p.y,
                           p.x * p.x + p.y * p.y, p.x * p.x * p.x, p.y * p.y * p.y,
                           p.x * p.x * p.y, p.x * p.y * p.y,
                           std::sin(3 * p.x), std::cos(3 * p.y), std::sin(5 * p.x + p.y),
                           std::cos(2 * p.x - 3 * p.y), std::sin(7 * p.y), std::cos(5 * p.x)};
        for (int j = 0; j < m; ++j) X(i, j) = vals[j % 16];
    }

    double scaleA = 0.0;
    for (int c = 0; c < AII.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(AII, c); it; ++it)
            scaleA = std::max(scaleA, std::abs(it.value()));

    for (int iter = 0; iter < 400; ++iter) {
        Eigen::MatrixXd Z = BII * X;
        Eigen::MatrixXd Y(n, m);
        for (int j = 0; j < m; ++j) Y.col(j) = ldlt.solve(Z.col(j));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Y = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
        Eigen::MatrixXd SA = Y.transpose() * (AII * Y);
        Eigen::MatrixXd SB = Y.transpose() * (BII * Y);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(SB, SA);
        if (ges.info() != Eigen::Success)
            throw Error(ErrorKind::NoConvergence, "dense Ritz step failed");
        // theta = 1/mu ascending; largest theta <-> smallest mu = 1 + lambda.
        Eigen::MatrixXd V = ges.eigenvectors();
        Eigen::VectorXd theta = ges.eigenvalues();
        for (int j = 0; j < m; ++j) X.col(j) = Y * V.col(m - 1 - j);

        bool done = true;
        Eigen::VectorXd mu(k);
        for (int j = 0; j < k; ++j) {
            double th = theta[m - 1 - j];
            mu[j] = (std::abs(th) > 1e-300) ? 1.0 / th : 1e300;
            Eigen::VectorXd Ax = AII * X.col(j);
            Eigen::VectorXd Bx = BII * X.col(j);
            double res = (Ax - mu[j] * Bx).norm() / std::max(Ax.norm(), scaleA * X.col(j).norm());
            if (res > 1e-9) { done = false; break; }
        }
        if (done) {
            for (int j = 0; j < k; ++j) {
                double bn = X.col(j).dot(BII * X.col(j));
                Eigen::VectorXd psi =
                    bn > 0 ? Eigen::VectorXd(X.col(j) / std::sqrt(bn)) : Eigen::VectorXd(X.col(j));
                ScalarField f(mesh);
                for (int i = 0; i < n; ++i) f[interior[i]] = psi[i];
                out.push_back({mu[j] - 1.0, std::move(f)});
            }
            std::sort(out.begin(), out.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            return out;
        }
    }
    throw Error(ErrorKind::NoConvergence, "subspace iteration did not converge");
}

}  // namespace mfe
