#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "resetgraph/linsys.hpp"

namespace resetgraph {

inline constexpr double kTolLmi = 1e-7;  // max residual eigenvalue of a satisfied LMI
inline constexpr double kTolPsd = 1e-8;  // min eigenvalue floor for "P >= 0"
inline constexpr double kTolR = 1e-9;    // smallest meaningful disk radius

enum class BlockSense { NegSemidef, PosSemidef };

enum class SolveStatus { Feasible, Infeasible, Indeterminate };

/// One affine symmetric constraint block: F0 + sum_k theta_k * Fk, with the
/// given sign sense. All matrices must be symmetric.
struct LmiBlock {
    Eigen::MatrixXd F0;
    std::vector<std::pair<int, Eigen::MatrixXd>> terms;
    BlockSense sense = BlockSense::NegSemidef;
};

/// Affine semidefinite feasibility problem in a vector of scalar decision
/// variables. Symmetric matrix variables are entered through their
/// upper-triangle scalar coordinates (see sym_basis / sym_from_vars).
class LmiProblem {
public:
    explicit LmiProblem(int num_vars) : num_vars_(num_vars) {}

    int num_vars() const { return num_vars_; }
    const std::vector<LmiBlock>& blocks() const { return blocks_; }

    void add_block(LmiBlock blk);

    /// Adds the m(m+1)/2 coordinates of a new symmetric m x m matrix variable;
    /// returns the base index of its coordinate range.
    int add_symmetric_var(int m);

    /// Adds one scalar variable, returns its index.
    int add_scalar_var() { return num_vars_++; }

private:
    int num_vars_ = 0;
    std::vector<LmiBlock> blocks_;
};

/// Basis matrix for upper-triangle coordinate k of an m x m symmetric matrix:
/// E_ii for diagonal entries, E_ij + E_ji off the diagonal.
Eigen::MatrixXd sym_basis(int m, int k);
int sym_var_count(int m);

/// Reassembles a symmetric matrix from its coordinates theta[base ... ).
Eigen::MatrixXd sym_from_vars(const Eigen::VectorXd& theta, int base, int m);

struct LmiSolution {
    SolveStatus status = SolveStatus::Indeterminate;
    Eigen::VectorXd theta;
    double slack = 0.0;  // optimal t in "minimize t s.t. block <= t*I"
    // Verified max eigenvalue over all blocks at theta; infinity until a
    // witness has been evaluated.
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;  // optimality reached (Feasible needs only the witness)
    int iterations = 0;
};

/// Solves "minimize t subject to every block shifted by t*I" with a primal-dual
/// interior-point method; Feasible means the verified residual is <= kTolLmi.
/// Non-convergence yields Indeterminate, which callers must treat as
/// infeasible in certification paths.
LmiSolution lmi_feasible(const LmiProblem& prob);

/// Witness that (sigma, lambda, r, P) satisfies the KYP-type containment LMI.
struct KypCertificate {
    int sigma = -1;
    double lambda = 0.0;
    double r = 0.0;
    Eigen::MatrixXd P;
    bool psd = false;       // P >= -kTolPsd verified
    double residual = 0.0;  // LMI residual at the solver's normalized scale
    double scale = 1.0;     // output normalization c (identity when c == 1)
    bool indeterminate_seen = false;
};

struct KypResult {
    std::optional<KypCertificate> cert;  // empty: infeasible
    bool indeterminate_seen = false;
};

/// Optimal-radius disk certificate for SG(H) at center lambda.
/// sigma = -1: minimal covering-disk radius. sigma = +1: maximal excluded-disk
/// radius (infeasible when no r > kTolR admits a certificate). Bisection over
/// r^2 with a runtime monotonicity assertion. hinf_hint, when >= 0, skips the
/// internal gain computation used for scaling and bracketing.
KypResult kyp_solve(const StateSpace& H, int sigma, double lambda, bool require_psd,
                    double hinf_hint = -1.0);

/// Symmetric PSD square root; eigenvalues in [-kTolPsd, 0) are clipped to 0,
/// anything below -kTolPsd is a precondition error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& P);

enum class ResetStructure { Fixed, Free, Scalar, Partial };

struct ResetStructureSpec {
    ResetStructure kind = ResetStructure::Fixed;
    Eigen::MatrixXd fixed_R;  // Fixed: the reset map to test
    int partial_p = 0;        // Partial: R = diag(R11, I_{m-p}), R11 free p x p

    static ResetStructureSpec fixed(Eigen::MatrixXd R);
    static ResetStructureSpec free_matrix() { return {ResetStructure::Free, {}, 0}; }
    static ResetStructureSpec scalar() { return {ResetStructure::Scalar, {}, 0}; }
    static ResetStructureSpec partial(int p) { return {ResetStructure::Partial, {}, p}; }
};

struct AdmissibilityResult {
    SolveStatus status = SolveStatus::Indeterminate;
    Eigen::MatrixXd R;
    double rho = 0.0;
    double residual = 0.0;
};

/// Feasibility of the reset-map containment LMI for one P >= 0 and fixed M:
///   [ P 0 R'S; 0 0 0; SR 0 0 ] + diag(rho*M, I_m) >= 0,  S = P^{1/2},
/// solved over the structured R entries and (optionally) rho >= 0.
AdmissibilityResult admissibility_solve(const Eigen::MatrixXd& P, const Eigen::MatrixXd& M,
                                        const ResetStructureSpec& structure, bool rho_free,
                                        double fixed_rho = 0.0);

struct JointAdmissibilityResult {
    SolveStatus status = SolveStatus::Indeterminate;
    Eigen::MatrixXd R;
    Eigen::VectorXd rhos;  // one multiplier per P (all equal when common_rho)
    double residual = 0.0;
};

/// One stacked LMI: common R across every P in the set, rho per P (or a single
/// shared rho when common_rho is set).
JointAdmissibilityResult admissibility_solve_joint(const std::vector<Eigen::MatrixXd>& Ps,
                                                   const Eigen::MatrixXd& M,
                                                   const ResetStructureSpec& structure,
                                                   bool common_rho = false);

}  // namespace resetgraph
