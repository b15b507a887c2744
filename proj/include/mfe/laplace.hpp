#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>

#include "mfe/geometry.hpp"

namespace mfe {

// Symmetric sparse operator on nodal P1 fields (stiffness or weighted mass).
struct SparseOperator {
    int dimension = 0;
    Eigen::SparseMatrix<double> mat;

    double quadratic_form(const ScalarField& u) const {
        Eigen::Map<const Eigen::VectorXd> v(u.values.data(), dimension);
        return v.dot(mat * v);
    }
};

SparseOperator assemble_stiffness(const Mesh& mesh);
// Mass weighted by a pointwise function or a nodal field (P1-interpolated).
SparseOperator assemble_weighted_mass(const Mesh& mesh,
                                      const std::function<double(const Vec2&)>& w);
SparseOperator assemble_weighted_mass(const Mesh& mesh, const ScalarField& w);

struct RobinData {
    Vec2 q;
    ScalarField regular_part;  // discrete-harmonic G~(.,q) on all nodes
    double gamma_q = 0.0;
};

// Dirichlet solves on a fixed mesh with the interior factorization cached.
class LaplaceSolver {
public:
    explicit LaplaceSolver(const Mesh& mesh);

    const Mesh& mesh() const { return mesh_; }
    const SparseOperator& stiffness() const { return A_; }
    const MeshLocator& locator() const { return locator_; }
    int n_interior() const { return static_cast<int>(interior_.size()); }

    // Zero right-hand side; boundary_values indexed by node (interior entries
    // ignored).
    ScalarField solve_dirichlet(const std::vector<double>& boundary_values) const;
    // Weak right-hand side integral f phi_i plus boundary data.
    ScalarField solve_dirichlet(const std::function<double(const Vec2&)>& f,
                                const std::vector<double>& boundary_values) const;
    // Raw interior load vector (already in weak form).
    ScalarField solve_interior_load(const Eigen::VectorXd& load) const;

    RobinData green_regular(const Vec2& q) const;
    double gamma_at(const Vec2& q) const { return green_regular(q).gamma_q; }
    std::vector<std::pair<Vec2, double>> robin_field(const std::vector<Vec2>& points) const;
    // Robin function at every node; boundary entries set to a large negative
    // sentinel (gamma diverges to -inf there).
    ScalarField robin_all_nodes() const;

    double min_boundary_distance(const Vec2& q) const;
    const std::vector<int>& interior_nodes() const { return interior_; }
    const std::vector<int>& interior_index() const { return idx_; }

    Eigen::VectorXd restrict_interior(const ScalarField& u) const;
    ScalarField extend_interior(const Eigen::VectorXd& v) const;

    const Eigen::SparseMatrix<double>& interior_stiffness() const { return AII_; }
    Eigen::VectorXd solve_interior_raw(const Eigen::VectorXd& rhs) const {
        return ldlt_.solve(rhs);
    }

private:
    const Mesh& mesh_;
    SparseOperator A_;
    std::vector<int> interior_;   // interior node ids
    std::vector<int> idx_;        // node id -> interior index or -1
    Eigen::SparseMatrix<double> AII_, AIB_;
    std::vector<int> boundary_;   // boundary node ids (column order of AIB_)
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    MeshLocator locator_;

    Eigen::VectorXd solve_checked(const Eigen::VectorXd& rhs) const;
};

// k algebraically smallest eigenvalues of (A - B) psi = lambda B psi on the
// interior nodes, fields extended by zero. Eigenfields are B-orthonormal.
std::vector<std::pair<double, ScalarField>> eig_smallest(const Mesh& mesh,
                                                         const SparseOperator& A,
                                                         const SparseOperator& B, int k);

}  // namespace mfe
