#include "resetgraph/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "resetgraph/util.hpp"

namespace resetgraph::commands {

using io::json;

namespace {

namespace fs = std::filesystem;

std::string out_path(const std::string& out_dir, const std::string& name) {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / name).string();
}

std::vector<double> lambdas_or_default(const json& cfg, const char* key, const StateSpace& sys) {
    if (cfg.contains(key)) return io::parse_grid(cfg[key], key);
    return default_lambda_grid(sys);
}

ResetStructureSpec parse_structure(const json& cfg, int m) {
    if (!cfg.contains("structure")) return ResetStructureSpec::free_matrix();
    const auto& s = cfg["structure"];
    if (s.is_string()) {
        std::string name = s.get<std::string>();
        if (name == "free") return ResetStructureSpec::free_matrix();
        if (name == "scalar") return ResetStructureSpec::scalar();
        throw ConfigError("unknown reset structure \"" + name + "\"");
    }
    io::require_keys(s, {"partial", "fixed"}, "structure");
    if (s.contains("partial")) return ResetStructureSpec::partial(s["partial"].get<int>());
    if (s.contains("fixed")) {
        Eigen::MatrixXd R = io::parse_matrix(s["fixed"], "structure.fixed");
        if (R.rows() != m) throw ConfigError("structure.fixed has wrong dimensions");
        return ResetStructureSpec::fixed(R);
    }
    throw ConfigError("structure must be \"free\", \"scalar\", {\"partial\": p} or {\"fixed\": R}");
}

Criterion parse_criterion(const json& cfg) {
    std::string c = cfg.value("criterion", "l2_u1");
    if (c == "l2_u1") return Criterion::L2U1;
    if (c == "overshoot") return Criterion::Overshoot;
    if (c == "settling") return Criterion::Settling;
    throw ConfigError("unknown criterion \"" + c + "\"");
}

}  // namespace

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const StepOneError&) {
        return kExitNotCertified;
    } catch (const ConfigError&) {
        return kExitConfig;
    } catch (const io::json::exception&) {
        return kExitConfig;
    } catch (const std::domain_error&) {
        return kExitSolver;
    } catch (const SolverError&) {
        return kExitSolver;
    }
}

int cmd_sg(const json& config, const std::string& out_dir, bool patch_mode) {
    return run_guarded([&]() {
        io::require_keys(config,
                         {"system", "lambdas", "boundary_samples", "epsilon_shift", "negate",
                          "invert"},
                         "sg config");
        if (!config.contains("system")) throw ConfigError("sg config: missing system");
        StateSpace sys = io::parse_system(config["system"], "system");
        if (config.value("epsilon_shift", 0.0) > 0.0)
            sys = shift_poles(sys, config["epsilon_shift"].get<double>());
        if (config.value("negate", false)) sys = negate(sys);
        std::vector<double> lambdas = lambdas_or_default(config, "lambdas", sys);

        RegionApprox rg = sg_overapprox(sys, lambdas, /*require_psd=*/patch_mode);
        if (config.value("invert", false)) rg = invert_region(rg);
        if (config.value("epsilon_shift", 0.0) > 0.0) {
            rg.provenance.eps_regularized = true;
            rg.provenance.epsilon = config["epsilon_shift"].get<double>();
        }

        json out = io::region_to_json(rg);
        io::stamp(out, config);
        io::write_file(out_path(out_dir, "region.json"), out.dump(2) + "\n");
        io::write_file(out_path(out_dir, "boundary.csv"),
                       io::boundary_csv(rg, config.value("boundary_samples", 2048)));
        return kExitOk;
    });
}

int cmd_admissible(const json& config, const std::string& out_dir) {
    return run_guarded([&]() {
        io::require_keys(config, {"system", "lambdas", "use_shortcut"}, "admissible config");
        if (!config.contains("system")) throw ConfigError("admissible config: missing system");
        ResetSystem sys = io::parse_reset_system(config["system"], "system");
        std::vector<double> lambdas = lambdas_or_default(config, "lambdas", sys.base);

        RegionApprox patch = patch_overapprox(sys.base, lambdas);
        AdmissibilityReport rep = check_admissible(sys, patch.provenance.certificates,
                                                   config.value("use_shortcut", true));
        json out = io::admissibility_to_json(rep);
        io::stamp(out, config);
        io::write_file(out_path(out_dir, "admissibility.json"), out.dump(2) + "\n");
        return rep.admissible ? kExitOk : kExitNotCertified;
    });
}

int cmd_stability(const json& config, const std::string& out_dir) {
    return run_guarded([&]() {
        io::require_keys(config,
                         {"plant", "bls", "lambdas_bls", "lambdas_plant", "epsilon", "mode",
                          "mu_count", "mu_min", "tol_sep", "samples_per_constraint"},
                         "stability config");
        if (!config.contains("plant") || !config.contains("bls"))
            throw ConfigError("stability config: needs plant and bls");
        StateSpace plant = io::parse_system(config["plant"], "plant");
        StateSpace bls = io::parse_system(config["bls"], "bls");
        double eps = config.value("epsilon", 1e-3);

        std::vector<double> lambdas_plant;
        if (config.contains("lambdas_plant")) {
            lambdas_plant = io::parse_grid(config["lambdas_plant"], "lambdas_plant");
        } else {
            lambdas_plant = default_lambda_grid(negate(shift_poles(plant, eps)));
        }
        std::vector<double> lambdas_bls = lambdas_or_default(config, "lambdas_bls", bls);

        StabilityOptions opts;
        opts.mu_count = config.value("mu_count", 20);
        opts.mu_min = config.value("mu_min", 0.05);
        opts.tol_sep = config.value("tol_sep", kTolSep);
        opts.samples_per_constraint = config.value("samples_per_constraint", 2048);
        StabilityMode mode =
            config.value("mode", std::string("soft")) == "hard" ? StabilityMode::Hard
                                                                : StabilityMode::Soft;

        RegionApprox h1 = h1_inverse_region(plant, lambdas_plant, eps);
        StabilityCertificate cert = check_stability(h1, bls, lambdas_bls, mode, opts);

        json out = io::certificate_to_json(cert);
        io::stamp(out, config);
        io::write_file(out_path(out_dir, "certificate.json"), out.dump(2) + "\n");
        return cert.stable ? kExitOk : kExitNotCertified;
    });
}

namespace {

PipelineConfig pipeline_config_from_json(const json& config) {
    io::require_keys(config,
                     {"plant", "bls", "lambdas_bls", "lambdas_plant", "epsilon", "mu_count",
                      "mu_min", "tol_sep", "k1_grid", "k2", "structure", "common_rho", "delta",
                      "T_end", "dt", "w_amplitude", "criterion", "samples_per_constraint"},
                     "design config");
    if (!config.contains("plant") || !config.contains("bls"))
        throw ConfigError("design config: needs plant and bls");
    PipelineConfig cfg;
    cfg.plant = io::parse_system(config["plant"], "plant");
    cfg.bls = io::parse_system(config["bls"], "bls");
    cfg.epsilon = config.value("epsilon", 1e-3);
    cfg.lambdas_bls = lambdas_or_default(config, "lambdas_bls", cfg.bls);
    if (config.contains("lambdas_plant"))
        cfg.lambdas_plant = io::parse_grid(config["lambdas_plant"], "lambdas_plant");
    else
        cfg.lambdas_plant = default_lambda_grid(negate(shift_poles(cfg.plant, cfg.epsilon)));
    cfg.mu_count = config.value("mu_count", 20);
    cfg.mu_min = config.value("mu_min", 0.05);
    cfg.tol_sep = config.value("tol_sep", kTolSep);
    if (config.contains("k1_grid"))
        cfg.k1_grid = io::parse_grid(config["k1_grid"], "k1_grid");
    else
        cfg.k1_grid = logspace(0.1, 20.0, 40);
    if (cfg.k1_grid.empty()) throw ConfigError("design config: empty k1 grid");
    cfg.k2 = config.value("k2", 0.0);
    cfg.structure = parse_structure(config, cfg.bls.states());
    cfg.common_rho = config.value("common_rho", false);
    cfg.delta = config.value("delta", 1e-2);
    cfg.T_end = config.value("T_end", 100.0);
    cfg.dt = config.value("dt", 1e-3);
    cfg.w_amplitude = config.value("w_amplitude", 1.0);
    cfg.criterion = parse_criterion(config);
    cfg.samples_per_constraint = config.value("samples_per_constraint", 2048);
    cfg.config_echo = io::canonical(config);
    return cfg;
}

}  // namespace

int cmd_design(const json& config, const std::string& out_dir) {
    return run_guarded([&]() {
        PipelineConfig cfg = pipeline_config_from_json(config);
        PipelineOutcome out;
        try {
            out = design_pipeline(cfg);
        } catch (const StepOneError& e) {
            json fail;
            fail["step1_failed"] = true;
            fail["measured_distance"] = e.distance;
            io::stamp(fail, config);
            io::write_file(out_path(out_dir, "design.json"), fail.dump(2) + "\n");
            return kExitNotCertified;
        }

        json doc = io::design_result_to_json(out.result);
        doc["step1_certificate"] = io::certificate_to_json(out.step1);
        doc["p_set_size"] = out.pset.certs.size();
        io::stamp(doc, config);
        io::write_file(out_path(out_dir, "design.json"), doc.dump(2) + "\n");
        io::write_file(out_path(out_dir, "scores.csv"), io::score_table_csv(out.result));
        json cert = io::certificate_to_json(out.step1);
        io::stamp(cert, config);
        io::write_file(out_path(out_dir, "step1_certificate.json"), cert.dump(2) + "\n");
        return kExitOk;
    });
}

int cmd_simulate(const json& config, const std::string& out_dir) {
    return run_guarded([&]() {
        io::require_keys(config,
                         {"mode", "system", "input", "plant", "controller", "w", "T_end", "dt"},
                         "simulate config");
        std::string mode = config.value("mode", std::string("open"));
        double T_end = config.value("T_end", 10.0);
        double dt = config.value("dt", 1e-3);
        if (mode == "open") {
            if (!config.contains("system")) throw ConfigError("simulate: missing system");
            ResetSystem sys = io::parse_reset_system(config["system"], "system");
            InputFn u = config.contains("input")
                            ? io::parse_input(config["input"], sys.base.size(), "input")
                            : make_zero_input(sys.base.size());
            SimTrace tr = simulate_reset(sys, u, T_end, dt);
            io::write_file(out_path(out_dir, "trace.csv"), io::trace_csv(tr));
            StepMetrics sm = step_metrics(tr.t, tr.y.row(0).transpose(), tr.u.row(0).transpose());
            json out = io::metrics_to_json(sm);
            out["jumps"] = tr.jumps;
            io::stamp(out, config);
            io::write_file(out_path(out_dir, "metrics.json"), out.dump(2) + "\n");
            return kExitOk;
        }
        if (mode == "closed") {
            if (!config.contains("plant") || !config.contains("controller"))
                throw ConfigError("simulate: closed mode needs plant and controller");
            StateSpace plant = io::parse_system(config["plant"], "plant");
            ResetSystem ctrl = io::parse_reset_system(config["controller"], "controller");
            InputFn w = config.contains("w") ? io::parse_input(config["w"], plant.size(), "w")
                                             : make_step_input(plant.size(), 1.0);
            ClosedLoopTrace tr = simulate_closed_loop(plant, ctrl, w, T_end, dt);
            io::write_file(out_path(out_dir, "trace.csv"), io::trace_csv(tr));
            json out = io::metrics_to_json(step_metrics(tr));
            out["jumps"] = tr.jumps;
            io::stamp(out, config);
            io::write_file(out_path(out_dir, "metrics.json"), out.dump(2) + "\n");
            return kExitOk;
        }
        throw ConfigError("simulate: mode must be \"open\" or \"closed\"");
    });
}

int cmd_sgcloud(const json& config, const std::string& out_dir) {
    return run_guarded([&]() {
        io::require_keys(config, {"system", "n_inputs", "T_grid", "seed", "dt"},
                         "sgcloud config");
        if (!config.contains("system")) throw ConfigError("sgcloud: missing system");
        ResetSystem sys = io::parse_reset_system(config["system"], "system");
        int n_inputs = config.value("n_inputs", 100);
        std::vector<double> T_grid = config.contains("T_grid")
                                         ? io::parse_grid(config["T_grid"], "T_grid")
                                         : linspace(1.0, 20.0, 10);
        auto cloud = sample_sg_cloud(sys, n_inputs, T_grid,
                                     config.value("seed", std::uint64_t{0}),
                                     config.value("dt", -1.0));
        io::write_file(out_path(out_dir, "cloud.csv"), io::cloud_csv(cloud));
        json out;
        out["points"] = io::cloud_to_json(cloud);
        io::stamp(out, config);
        io::write_file(out_path(out_dir, "cloud.json"), out.dump(2) + "\n");
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// Pinned worked-example reproduction
// ---------------------------------------------------------------------------
namespace {

// Center grid for the inverse-graph region of the moving-mass plant: a dense
// positive log range covering the carved band around the controller region,
// the gain-disk center 0, and a far negative tail past the spectrum minimum.
std::vector<double> example_plant_lambdas() {
    std::vector<double> ls = logspace(0.2, 2e4, 160);
    ls.push_back(0.0);
    for (double v : logspace(5.1e3, 1e5, 12)) ls.push_back(-v);
    std::sort(ls.begin(), ls.end());
    return ls;
}

json example_config_json() {
    json cfg;
    cfg["plant"] = {{"tf", {{"num", {1.0}}, {"den", {1.0, 0.2, 0.0}}}}};
    cfg["bls"] = {{"tf", {{"num", {0.1, 0.1, 0.155}}, {"den", {1.0, 1.0, 1.0}}}}};
    cfg["lambdas_bls"] = {{"min", -1.0}, {"max", 1.0}, {"count", 201}};
    cfg["lambdas_plant"] = example_plant_lambdas();
    cfg["epsilon"] = 1e-3;
    cfg["mu_count"] = 20;
    cfg["mu_min"] = 0.05;
    cfg["tol_sep"] = 1e-3;
    cfg["k1_grid"] = {{"min", 0.1}, {"max", 20.0}, {"count", 40}, {"spacing", "log"}};
    cfg["k2"] = 0.0;
    cfg["structure"] = "free";
    cfg["delta"] = 1e-2;
    cfg["T_end"] = 100.0;
    cfg["dt"] = 1e-3;
    cfg["w_amplitude"] = 1.0;
    cfg["criterion"] = "l2_u1";
    cfg["samples_per_constraint"] = 4096;
    return cfg;
}

}  // namespace

int cmd_reproduce_example(const std::string& out_dir, std::uint64_t seed) {
    return run_guarded([&]() {
        json cfg_json = example_config_json();
        PipelineConfig cfg = pipeline_config_from_json(cfg_json);
        PipelineOutcome out = design_pipeline(cfg);

        // Criterion (a): positive separation over the homotopy grid.
        bool pass_a = out.step1.stable && out.step1.r_min > 0.0;

        // Criterion (b): the feasible set contains (R = 0, k1 nearest 6.2).
        double target_k1 = 6.2;
        double nearest = cfg.k1_grid.front();
        for (double k : cfg.k1_grid)
            if (std::abs(k - target_k1) < std::abs(nearest - target_k1)) nearest = k;
        bool pass_b = false;
        for (const auto& cand : out.feasible)
            if (cand.k1 == nearest && cand.R.cwiseAbs().maxCoeff() <= 1e-9) pass_b = true;

        // Criterion (c): selected reset loop beats the base linear loop on
        // overshoot and 2% settling time.
        const ScoredCandidate& sel = out.result.scored[out.result.selected];
        const int m2 = cfg.bls.states(), n = cfg.bls.size();
        ResetSystem linear_ctrl{cfg.bls, Eigen::MatrixXd::Identity(m2, m2),
                                Eigen::MatrixXd::Identity(m2 + n, m2 + n), cfg.delta};
        ClosedLoopTrace bls_tr = simulate_closed_loop(
            cfg.plant, linear_ctrl, make_step_input(n, cfg.w_amplitude), cfg.T_end, cfg.dt);
        StepMetrics bls_metrics = step_metrics(bls_tr);
        bool pass_c = sel.metrics.overshoot_pct < bls_metrics.overshoot_pct &&
                      sel.metrics.settled && bls_metrics.settled &&
                      sel.metrics.settling_time < bls_metrics.settling_time;

        // Validation cloud: truncated gain/phase samples of the selected reset
        // controller stay inside the (inflated) patch of its base system.
        ResetSystem selected_ctrl{cfg.bls, sel.candidate.R,
                                  MStructure::build(cfg.bls, sel.candidate.k1, cfg.k2).M,
                                  cfg.delta};
        auto cloud = sample_sg_cloud(selected_ctrl, 50, linspace(2.0, 20.0, 8), seed);
        RegionApprox inflated = inflate_region(out.pset.region, 1e-2);
        std::size_t inside = 0;
        auto pts = cloud_points(cloud);
        for (const auto& z : pts)
            if (membership(inflated, z, kTolMember + 1e-2)) ++inside;
        bool pass_cloud = inside == pts.size();

        // Artifacts.
        json report;
        report["criteria"]["a_step1_separation"] = {{"pass", pass_a},
                                                    {"r_min", out.step1.r_min}};
        report["criteria"]["b_feasible_contains_R0_k1"] = {{"pass", pass_b},
                                                           {"nearest_k1", nearest}};
        report["criteria"]["c_step_response"] = {
            {"pass", pass_c},
            {"reset_overshoot_pct", sel.metrics.overshoot_pct},
            {"bls_overshoot_pct", bls_metrics.overshoot_pct},
            {"reset_settling", sel.metrics.settling_time},
            {"bls_settling", bls_metrics.settling_time}};
        report["criteria"]["cloud_containment"] = {{"pass", pass_cloud},
                                                   {"inside", inside},
                                                   {"total", pts.size()}};
        report["selected_k1"] = sel.candidate.k1;
        report["selected_R"] = io::matrix_to_json(sel.candidate.R);
        report["lambda_interpretation"] =
            "Lambda = uniform step-0.01 grid on [-1, 1] (201 points)";
        bool pass = pass_a && pass_b && pass_c && pass_cloud;
        report["pass"] = pass;
        io::stamp(report, cfg_json);

        io::write_file(out_path(out_dir, "report.json"), report.dump(2) + "\n");
        json cert = io::certificate_to_json(out.step1);
        io::stamp(cert, cfg_json);
        io::write_file(out_path(out_dir, "certificate.json"), cert.dump(2) + "\n");
        json design_doc = io::design_result_to_json(out.result);
        io::stamp(design_doc, cfg_json);
        io::write_file(out_path(out_dir, "design.json"), design_doc.dump(2) + "\n");
        io::write_file(out_path(out_dir, "scores.csv"), io::score_table_csv(out.result));
        json patch_doc = io::region_to_json(out.pset.region);
        io::stamp(patch_doc, cfg_json);
        io::write_file(out_path(out_dir, "patch_region.json"), patch_doc.dump(2) + "\n");
        io::write_file(out_path(out_dir, "patch_boundary.csv"),
                       io::boundary_csv(out.pset.region, 2048));
        RegionApprox h1 = h1_inverse_region(cfg.plant, cfg.lambdas_plant, cfg.epsilon);
        json h1_doc = io::region_to_json(h1);
        io::stamp(h1_doc, cfg_json);
        io::write_file(out_path(out_dir, "h1_region.json"), h1_doc.dump(2) + "\n");
        io::write_file(out_path(out_dir, "h1_boundary.csv"), io::boundary_csv(h1, 2048));
        ClosedLoopTrace sel_tr = simulate_closed_loop(
            cfg.plant, selected_ctrl, make_step_input(n, cfg.w_amplitude), cfg.T_end, cfg.dt);
        io::write_file(out_path(out_dir, "step_reset.csv"), io::trace_csv(sel_tr));
        io::write_file(out_path(out_dir, "step_bls.csv"), io::trace_csv(bls_tr));
        io::write_file(out_path(out_dir, "cloud.csv"), io::cloud_csv(cloud));

        return pass ? kExitOk : kExitNotCertified;
    });
}

}  // namespace resetgraph::commands
