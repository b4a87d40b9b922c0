#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <optional>
#include <vector>

#include "girderlab/model.hpp"
#include "girderlab/shell_element.hpp"

namespace girderlab {

using SparseMat = Eigen::SparseMatrix<double>;

/// (node, dof) -> free equation index or prescribed value.
struct DofMap {
    int n_free = 0;
    std::vector<int> eq;              // 6*n_nodes; >=0 equation index, -1 prescribed
    std::vector<double> prescribed;   // 6*n_nodes; value where eq == -1

    int gdof(int node, int d) const { return 6 * node + d; }
    bool is_free(int g) const { return eq[g] >= 0; }
};

/// Binds a model to its element system, dof numbering and load pattern.
/// Assembly is deterministic: elements are reduced in model order into a
/// precomputed sparse pattern.
class Structure {
public:
    explicit Structure(const BridgeModel& model,
                       const std::vector<std::pair<int, double>>& extra_prescribed = {},
                       int control_gdof = -1);

    const BridgeModel& model() const { return *model_; }
    const ElementSystem& elements() const { return esys_; }
    const DofMap& dofs() const { return dofmap_; }
    int control_gdof() const { return control_gdof_; }

    void set_prescribed(int gdof, double value) { dofmap_.prescribed[gdof] = value; }

    /// Full 6n displacement vector from free values + prescribed values.
    Eigen::VectorXd expand(const Eigen::VectorXd& u_free) const;

    /// Internal force on free dofs (and at the control dof when present).
    void assemble_force(const Eigen::VectorXd& u_full, const std::vector<PointState>& committed,
                        std::vector<PointState>* trial, Eigen::VectorXd& f_free,
                        double* f_control = nullptr) const;

    /// Consistent tangent on free dofs plus force from the same pass; also
    /// fills the dense control row (tangent coupling of the driven dof).
    void assemble_tangent(const Eigen::VectorXd& u_full, const std::vector<PointState>& committed,
                          std::vector<PointState>* trial, SparseMat& K, Eigen::VectorXd& f_free,
                          double* f_control = nullptr, Eigen::VectorXd* control_row = nullptr,
                          double* control_diag = nullptr, bool exact_element_tangents = true) const;

    /// Stress-linear geometric stiffness on free dofs.
    void assemble_geometric(const Eigen::VectorXd& u_full,
                            const std::vector<PointState>& committed, SparseMat& Kg) const;

    /// Consistent nodal load pattern (free dofs) of the model load case,
    /// its value at the control dof, and the total pattern resultant.
    const Eigen::VectorXd& pattern() const { return pattern_free_; }
    double pattern_control() const { return pattern_control_; }
    double pattern_total() const { return pattern_total_; }
    /// Pattern on all 6n dofs (reaction recovery, diagnostics).
    const Eigen::VectorXd& pattern_full() const { return pattern_full_; }

private:
    const BridgeModel* model_;
    ElementSystem esys_;
    DofMap dofmap_;
    int control_gdof_ = -1;
    SparseMat pattern_matrix_;           // sparsity template
    std::vector<int> scatter_;           // per element: 24*24 value slots (-1 cross terms)
    Eigen::VectorXd pattern_free_, pattern_full_;
    double pattern_control_ = 0.0;
    double pattern_total_ = 0.0;

    void build_pattern();
    void build_load_pattern();
};

struct SolveDiagnostics {
    bool ok = true;
    std::string message;
    int offending_gdof = -1;
};

/// Direct sparse LDLT solve; reports the offending dof on singular or
/// indefinite factorizations. `dofmap` translates pivot indices back to
/// (node, dof) for the message.
std::optional<Eigen::VectorXd> solve_linear(const SparseMat& K, const Eigen::VectorXd& f,
                                            const DofMap* dofmap = nullptr,
                                            SolveDiagnostics* diag = nullptr);

struct BucklingResult {
    std::vector<double> lambdas;              // positive multipliers, ascending
    std::vector<Eigen::VectorXd> modes;       // max-norm 1, free dofs
    std::vector<double> residuals;
};

/// Solves (K + lambda Kg) phi = 0 for the lowest positive multipliers by
/// inverse iteration with Gram-Schmidt deflation in the K inner product.
BucklingResult buckling_modes(const SparseMat& K, const SparseMat& Kg, int n_modes,
                              double tol = 1e-8, int max_iter = 3000);

}  // namespace girderlab
