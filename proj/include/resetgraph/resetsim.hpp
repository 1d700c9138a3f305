#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "resetgraph/linsys.hpp"
#include "resetgraph/sgregions.hpp"

namespace resetgraph {

/// Reset system: LTI flow plus the jump x+ = R x when [x;u]'M[x;u] <= 0 and
/// the regularization timer has reached delta.
struct ResetSystem {
    StateSpace base;
    Eigen::MatrixXd R;  // m x m reset map
    Eigen::MatrixXd M;  // (m+n) x (m+n) symmetric jump-set matrix
    double delta = 1e-2;

    void validate() const;
};

using InputFn = std::function<Eigen::VectorXd(double)>;

InputFn make_zero_input(int n);
InputFn make_step_input(int n, double amplitude, double t_on = 0.0);
InputFn make_sine_input(int n, double amplitude, double omega, double phase = 0.0);

/// Seeded pseudo-random member of the SG-sampling input family: per channel a
/// sum of 1-5 exponentially decaying sinusoids, frequencies log-uniform in
/// [1e-2, 1e2] rad/s, amplitudes in [0.1, 10], decay rates in [0.05, 1].
InputFn make_decaying_sum_input(int n, std::uint64_t seed);

struct SimTrace {
    std::vector<double> t;
    Eigen::MatrixXd x, u, y;        // columns indexed by the time grid
    std::vector<double> tau;
    std::vector<double> jumps;      // jump times t0, t1, ...
    std::vector<std::uint8_t> jump_flag;  // 1 when a jump occurred in (t_{k-1}, t_k]
    Eigen::MatrixXd jump_pre_x, jump_post_x;  // states across each jump
};

/// Fixed-step RK4 integration of the flow with step-end jump detection;
/// trigger times are localized by bisection to dt * 1e-3. Requires
/// dt <= delta/10. Throws SolverError with a time stamp on divergence.
SimTrace simulate_reset(const ResetSystem& sys, const InputFn& u, double T_end, double dt);

struct ClosedLoopTrace {
    std::vector<double> t;
    Eigen::MatrixXd x1, x2;             // plant / controller states
    Eigen::MatrixXd u1, y1, u2, y2;     // internal signals of the loop
    std::vector<double> tau;
    std::vector<double> jumps;
    std::vector<std::uint8_t> jump_flag;
};

/// Negative feedback loop: u1 = w - y2, u2 = y1; jumps act on the controller
/// state only. Requires D_plant * D_ctrl = 0 (no algebraic loop).
ClosedLoopTrace simulate_closed_loop(const StateSpace& plant, const ResetSystem& ctrl,
                                     const InputFn& w, double T_end, double dt);

struct GainPhasePoint {
    double rho = 0.0;    // ||P_T y|| / ||P_T u||
    double theta = 0.0;  // arccos of the normalized truncated inner product, in [0, pi]
    double T = 0.0;
    bool rho_inf = false;  // u truncates to zero while y does not
};

/// Trapezoidal truncated gain/phase over [0, T] on a common time grid.
GainPhasePoint truncated_gain_phase(const std::vector<double>& t, const Eigen::MatrixXd& u,
                                    const Eigen::MatrixXd& y, double T);

/// Inner sample of the hard scaled graph: seeded input family x truncation
/// grid, ordered by (input, T). dt < 0 selects delta/10.
std::vector<GainPhasePoint> sample_sg_cloud(const ResetSystem& sys, int n_inputs,
                                            const std::vector<double>& T_grid,
                                            std::uint64_t seed, double dt = -1.0);

/// Complex points rho * exp(+-j theta) of the finite cloud entries.
std::vector<Complex> cloud_points(const std::vector<GainPhasePoint>& cloud);

struct StepMetrics {
    double overshoot_pct = 0.0;
    double settling_time = 0.0;  // 2% band, relative to the final 10% mean value
    double l2_u1 = 0.0;
    double l2_y1 = 0.0;
    bool settled = false;
};

StepMetrics step_metrics(const std::vector<double>& t, const Eigen::VectorXd& y1,
                         const Eigen::VectorXd& u1);
StepMetrics step_metrics(const ClosedLoopTrace& trace);

}  // namespace resetgraph
