#include "resetgraph/resetsim.hpp"

#include <algorithm>
#include <cmath>

#include "resetgraph/util.hpp"

namespace resetgraph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ResetSystem::validate() const {
    base.validate();
    const int m = base.states();
    const int n = base.size();
    if (R.rows() != m || R.cols() != m) throw ConfigError("reset map R must be m x m");
    if (M.rows() != m + n || M.cols() != m + n)
        throw ConfigError("jump-set matrix M must be (m+n) x (m+n)");
    if ((M - M.transpose()).norm() > 1e-12 * std::max(1.0, M.norm()))
        throw ConfigError("jump-set matrix M must be symmetric");
    if (!(delta > 0.0)) throw ConfigError("regularization threshold delta must be positive");
}

InputFn make_zero_input(int n) {
    return [n](double) { return VectorXd::Zero(n); };
}

InputFn make_step_input(int n, double amplitude, double t_on) {
    return [n, amplitude, t_on](double t) {
        return t >= t_on ? VectorXd::Constant(n, amplitude) : VectorXd::Zero(n);
    };
}

InputFn make_sine_input(int n, double amplitude, double omega, double phase) {
    return [n, amplitude, omega, phase](double t) {
        return VectorXd::Constant(n, amplitude * std::sin(omega * t + phase));
    };
}

InputFn make_decaying_sum_input(int n, std::uint64_t seed) {
    struct Term {
        double a, d, w, phi;
    };
    std::vector<std::vector<Term>> channels(n);
    Rng rng(seed);
    for (int ch = 0; ch < n; ++ch) {
        int k = rng.uniform_int(1, 5);
        for (int i = 0; i < k; ++i) {
            Term tm;
            tm.a = rng.uniform(0.1, 10.0);
            tm.w = rng.log_uniform(1e-2, 1e2);
            tm.phi = rng.uniform(0.0, 2.0 * M_PI);
            tm.d = rng.log_uniform(0.05, 1.0);
            channels[ch].push_back(tm);
        }
    }
    return [channels, n](double t) {
        VectorXd u(n);
        for (int ch = 0; ch < n; ++ch) {
            double v = 0.0;
            for (const auto& tm : channels[ch])
                v += tm.a * std::exp(-tm.d * t) * std::sin(tm.w * t + tm.phi);
            u(ch) = v;
        }
        return u;
    };
}

namespace {

// One RK4 step of x' = A x + B u(t).
VectorXd rk4_step(const MatrixXd& A, const MatrixXd& B, const InputFn& u, double t,
                  const VectorXd& x, double h) {
    VectorXd k1 = A * x + B * u(t);
    VectorXd k2 = A * (x + 0.5 * h * k1) + B * u(t + 0.5 * h);
    VectorXd k3 = A * (x + 0.5 * h * k2) + B * u(t + 0.5 * h);
    VectorXd k4 = A * (x + h * k3) + B * u(t + h);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double jump_quadratic(const Eigen::MatrixXd& M, const VectorXd& x, const VectorXd& u) {
    VectorXd q(x.size() + u.size());
    q << x, u;
    return q.dot(M * q);
}

}  // namespace

SimTrace simulate_reset(const ResetSystem& sys, const InputFn& u, double T_end, double dt) {
    sys.validate();
    if (!(dt > 0.0) || dt > sys.delta / 10.0 * (1.0 + 1e-12))
        throw ConfigError("simulate_reset requires 0 < dt <= delta/10");
    if (!(T_end > 0.0)) throw ConfigError("T_end must be positive");

    const int m = sys.base.states();
    const int n = sys.base.size();
    const auto& A = sys.base.A;
    const auto& B = sys.base.B;
    const int N = static_cast<int>(std::ceil(T_end / dt - 1e-9));

    SimTrace tr;
    tr.t.resize(N + 1);
    tr.x.resize(m, N + 1);
    tr.u.resize(n, N + 1);
    tr.y.resize(n, N + 1);
    tr.tau.resize(N + 1);
    tr.jump_flag.assign(N + 1, 0);

    VectorXd x = VectorXd::Zero(m);
    double tau = 0.0;
    std::vector<VectorXd> pre_states, post_states;

    auto record = [&](int k, double t) {
        tr.t[k] = t;
        tr.x.col(k) = x;
        VectorXd uk = u(t);
        tr.u.col(k) = uk;
        tr.y.col(k) = sys.base.C * x + sys.base.D * uk;
        tr.tau[k] = tau;
    };
    record(0, 0.0);

    const double bisect_tol = dt * 1e-3;
    for (int k = 0; k < N; ++k) {
        const double t0 = k * dt;
        const double t1 = t0 + dt;
        VectorXd x0 = x;
        const double tau0 = tau;

        VectorXd x_end = rk4_step(A, B, u, t0, x0, dt);
        double tau_end = tau0 + dt;
        bool jumped = false;

        // Trigger on strict entry into the jump set; a trajectory resting on
        // the F/J boundary (v = 0 throughout) keeps flowing per flow priority.
        double v_start = jump_quadratic(sys.M, x0, u(t0));
        double v_end = jump_quadratic(sys.M, x_end, u(t1));
        bool enters_jump_set = v_end < 0.0 || (v_end <= 0.0 && v_start > 0.0);
        if (tau_end >= sys.delta && enters_jump_set) {
            // Earliest admissible trigger: the timer gate first, then the
            // quadratic sign change, localized by bisection.
            double s0 = tau0 >= sys.delta ? t0 : t0 + (sys.delta - tau0);
            auto state_at = [&](double s) {
                return s <= t0 ? x0 : rk4_step(A, B, u, t0, x0, s - t0);
            };
            double t_star;
            VectorXd x_star;
            VectorXd xs0 = state_at(s0);
            if (jump_quadratic(sys.M, xs0, u(s0)) <= 0.0) {
                t_star = s0;
                x_star = xs0;
            } else {
                double lo = s0, hi = t1;
                while (hi - lo > bisect_tol) {
                    double mid = 0.5 * (lo + hi);
                    if (jump_quadratic(sys.M, state_at(mid), u(mid)) <= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                t_star = hi;
                x_star = state_at(hi);
            }
            pre_states.push_back(x_star);
            x = sys.R * x_star;
            post_states.push_back(x);
            tau = 0.0;
            tr.jumps.push_back(t_star);
            tr.jump_flag[k + 1] = 1;
            if (t1 > t_star) x = rk4_step(A, B, u, t_star, x, t1 - t_star);
            tau += t1 - t_star;
            jumped = true;
        }

        if (!jumped) {
            x = x_end;
            tau = tau_end;
        }
        if (!x.allFinite() || x.norm() > 1e14)
            throw SolverError("simulation diverged at t = " + std::to_string(t1));
        record(k + 1, t1);
    }

    tr.jump_pre_x.resize(m, static_cast<int>(pre_states.size()));
    tr.jump_post_x.resize(m, static_cast<int>(post_states.size()));
    for (std::size_t i = 0; i < pre_states.size(); ++i) {
        tr.jump_pre_x.col(static_cast<int>(i)) = pre_states[i];
        tr.jump_post_x.col(static_cast<int>(i)) = post_states[i];
    }
    return tr;
}

ClosedLoopTrace simulate_closed_loop(const StateSpace& plant, const ResetSystem& ctrl,
                                     const InputFn& w, double T_end, double dt) {
    plant.validate();
    ctrl.validate();
    if (plant.size() != ctrl.base.size())
        throw ConfigError("plant and controller I/O dimensions differ");
    if ((plant.D * ctrl.base.D).norm() > 1e-14 * (1.0 + plant.D.norm() * ctrl.base.D.norm()))
        throw ConfigError("algebraic loop: D_plant * D_ctrl must be zero");
    if (!(dt > 0.0) || dt > ctrl.delta / 10.0 * (1.0 + 1e-12))
        throw ConfigError("simulate_closed_loop requires 0 < dt <= delta/10");

    const int m1 = plant.states(), m2 = ctrl.base.states();
    const int n = plant.size();
    const int N = static_cast<int>(std::ceil(T_end / dt - 1e-9));

    // Output solution with D1*D2 = 0:
    //   y1 = C1 x1 + D1 w - D1 C2 x2,   y2 = C2 x2 + D2 y1.
    auto outputs = [&](const VectorXd& z, double t, VectorXd& y1, VectorXd& y2) {
        VectorXd x1 = z.head(m1), x2 = z.tail(m2);
        y1 = plant.C * x1 + plant.D * w(t) - plant.D * (ctrl.base.C * x2);
        y2 = ctrl.base.C * x2 + ctrl.base.D * y1;
    };
    auto deriv = [&](double t, const VectorXd& z) {
        VectorXd y1, y2;
        outputs(z, t, y1, y2);
        VectorXd dz(m1 + m2);
        dz.head(m1) = plant.A * z.head(m1) + plant.B * (w(t) - y2);
        dz.tail(m2) = ctrl.base.A * z.tail(m2) + ctrl.base.B * y1;
        return dz;
    };
    auto rk4 = [&](double t, const VectorXd& z, double h) {
        VectorXd k1 = deriv(t, z);
        VectorXd k2 = deriv(t + 0.5 * h, z + 0.5 * h * k1);
        VectorXd k3 = deriv(t + 0.5 * h, z + 0.5 * h * k2);
        VectorXd k4 = deriv(t + h, z + h * k3);
        return (z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
    };
    // Controller jump condition on q2 = [x2; u2] with u2 = y1.
    auto jump_value = [&](const VectorXd& z, double t) {
        VectorXd y1, y2;
        outputs(z, t, y1, y2);
        return jump_quadratic(ctrl.M, z.tail(m2), y1);
    };

    ClosedLoopTrace tr;
    tr.t.resize(N + 1);
    tr.x1.resize(m1, N + 1);
    tr.x2.resize(m2, N + 1);
    tr.u1.resize(n, N + 1);
    tr.y1.resize(n, N + 1);
    tr.u2.resize(n, N + 1);
    tr.y2.resize(n, N + 1);
    tr.tau.resize(N + 1);
    tr.jump_flag.assign(N + 1, 0);

    VectorXd z = VectorXd::Zero(m1 + m2);
    double tau = 0.0;
    auto record = [&](int k, double t) {
        VectorXd y1, y2;
        outputs(z, t, y1, y2);
        tr.t[k] = t;
        tr.x1.col(k) = z.head(m1);
        tr.x2.col(k) = z.tail(m2);
        tr.y1.col(k) = y1;
        tr.y2.col(k) = y2;
        tr.u1.col(k) = w(t) - y2;
        tr.u2.col(k) = y1;
        tr.tau[k] = tau;
    };
    record(0, 0.0);

    const double bisect_tol = dt * 1e-3;
    for (int k = 0; k < N; ++k) {
        const double t0 = k * dt;
        const double t1 = t0 + dt;
        VectorXd z0 = z;
        const double tau0 = tau;

        VectorXd z_end = rk4(t0, z0, dt);
        double tau_end = tau0 + dt;
        bool jumped = false;

        double v_start = jump_value(z0, t0);
        double v_end = jump_value(z_end, t1);
        bool enters_jump_set = v_end < 0.0 || (v_end <= 0.0 && v_start > 0.0);
        if (tau_end >= ctrl.delta && enters_jump_set) {
            double s0 = tau0 >= ctrl.delta ? t0 : t0 + (ctrl.delta - tau0);
            auto state_at = [&](double s) { return s <= t0 ? z0 : rk4(t0, z0, s - t0); };
            double t_star;
            VectorXd z_star;
            VectorXd zs0 = state_at(s0);
            if (jump_value(zs0, s0) <= 0.0) {
                t_star = s0;
                z_star = zs0;
            } else {
                double lo = s0, hi = t1;
                while (hi - lo > bisect_tol) {
                    double mid = 0.5 * (lo + hi);
                    if (jump_value(state_at(mid), mid) <= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                t_star = hi;
                z_star = state_at(hi);
            }
            z = z_star;
            z.tail(m2) = ctrl.R * z_star.tail(m2);
            tau = 0.0;
            tr.jumps.push_back(t_star);
            tr.jump_flag[k + 1] = 1;
            if (t1 > t_star) z = rk4(t_star, z, t1 - t_star);
            tau += t1 - t_star;
            jumped = true;
        }

        if (!jumped) {
            z = z_end;
            tau = tau_end;
        }
        if (!z.allFinite() || z.norm() > 1e14)
            throw SolverError("closed-loop simulation diverged at t = " + std::to_string(t1));
        record(k + 1, t1);
    }
    return tr;
}

namespace {

// Trapezoidal weights on [0, t_idx].
double trapz_dot(const std::vector<double>& t, const MatrixXd& a, const MatrixXd& b, int last) {
    double acc = 0.0;
    for (int k = 0; k < last; ++k) {
        double h = t[k + 1] - t[k];
        acc += 0.5 * h * (a.col(k).dot(b.col(k)) + a.col(k + 1).dot(b.col(k + 1)));
    }
    return acc;
}

}  // namespace

GainPhasePoint truncated_gain_phase(const std::vector<double>& t, const MatrixXd& u,
                                    const MatrixXd& y, double T) {
    if (t.empty() || u.cols() != static_cast<int>(t.size()) ||
        y.cols() != static_cast<int>(t.size()))
        throw ConfigError("truncated_gain_phase: signals must share the time grid");
    int last = 0;
    while (last + 1 < static_cast<int>(t.size()) && t[last + 1] <= T + 1e-12) ++last;

    GainPhasePoint p;
    p.T = T;
    double uu = trapz_dot(t, u, u, last);
    double yy = trapz_dot(t, y, y, last);
    double uy = trapz_dot(t, u, y, last);
    double nu = std::sqrt(std::max(uu, 0.0));
    double ny = std::sqrt(std::max(yy, 0.0));
    if (nu == 0.0 && ny == 0.0) return p;  // rho = 0, theta = 0
    if (nu == 0.0) {
        p.rho_inf = true;
        return p;
    }
    p.rho = ny / nu;
    if (ny == 0.0) return p;  // theta = 0 when either signal is zero
    p.theta = std::acos(std::clamp(uy / (nu * ny), -1.0, 1.0));
    return p;
}

std::vector<GainPhasePoint> sample_sg_cloud(const ResetSystem& sys, int n_inputs,
                                            const std::vector<double>& T_grid,
                                            std::uint64_t seed, double dt) {
    sys.validate();
    if (n_inputs < 0) throw ConfigError("n_inputs must be nonnegative");
    if (n_inputs == 0 || T_grid.empty()) return {};
    if (!is_hurwitz(sys.base.A))
        throw std::domain_error("sample_sg_cloud requires a Hurwitz base system");
    if (dt <= 0.0) dt = sys.delta / 10.0;
    const double T_max = *std::max_element(T_grid.begin(), T_grid.end());

    Rng master(seed);
    std::vector<std::uint64_t> seeds(n_inputs);
    for (auto& s : seeds) s = master.next_u64();

    std::vector<std::vector<GainPhasePoint>> per_input(n_inputs);
    parallel_for(n_inputs, [&](std::size_t i) {
        InputFn u = make_decaying_sum_input(sys.base.size(), seeds[i]);
        SimTrace tr = simulate_reset(sys, u, T_max, dt);
        auto& out = per_input[i];
        out.reserve(T_grid.size());
        for (double T : T_grid) out.push_back(truncated_gain_phase(tr.t, tr.u, tr.y, T));
    });

    std::vector<GainPhasePoint> cloud;
    cloud.reserve(static_cast<std::size_t>(n_inputs) * T_grid.size());
    for (auto& chunk : per_input)
        cloud.insert(cloud.end(), chunk.begin(), chunk.end());
    return cloud;
}

std::vector<Complex> cloud_points(const std::vector<GainPhasePoint>& cloud) {
    std::vector<Complex> pts;
    pts.reserve(2 * cloud.size());
    for (const auto& p : cloud) {
        if (p.rho_inf) continue;
        pts.emplace_back(p.rho * std::cos(p.theta), p.rho * std::sin(p.theta));
        if (p.theta > 0.0) pts.emplace_back(p.rho * std::cos(p.theta), -p.rho * std::sin(p.theta));
    }
    return pts;
}

StepMetrics step_metrics(const std::vector<double>& t, const VectorXd& y1, const VectorXd& u1) {
    if (t.size() < 2 || y1.size() != static_cast<int>(t.size()) ||
        u1.size() != static_cast<int>(t.size()))
        throw ConfigError("step_metrics: inconsistent trace");
    const int N = static_cast<int>(t.size());

    StepMetrics sm;
    int tail_start = std::max(0, N - std::max(1, N / 10));
    double y_final = y1.segment(tail_start, N - tail_start).mean();

    double peak = y1.maxCoeff();
    double denom = std::abs(y_final);
    sm.overshoot_pct = denom > 1e-12 ? std::max(0.0, (peak - y_final) / denom) * 100.0 : 0.0;

    double band = 0.02 * denom;
    int last_violation = -1;
    for (int k = 0; k < N; ++k)
        if (std::abs(y1(k) - y_final) > band) last_violation = k;
    if (last_violation == N - 1) {
        sm.settled = false;
        sm.settling_time = t.back();
    } else {
        sm.settled = true;
        sm.settling_time = last_violation < 0 ? 0.0 : t[last_violation + 1];
    }

    auto l2 = [&](const VectorXd& v) {
        double acc = 0.0;
        for (int k = 0; k + 1 < N; ++k)
            acc += 0.5 * (t[k + 1] - t[k]) * (v(k) * v(k) + v(k + 1) * v(k + 1));
        return std::sqrt(acc);
    };
    sm.l2_u1 = l2(u1);
    sm.l2_y1 = l2(y1);
    return sm;
}

StepMetrics step_metrics(const ClosedLoopTrace& trace) {
    return step_metrics(trace.t, trace.y1.row(0).transpose(), trace.u1.row(0).transpose());
}

}  // namespace resetgraph
