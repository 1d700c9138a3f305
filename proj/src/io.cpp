#include "resetgraph/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "resetgraph/util.hpp"

namespace resetgraph::io {

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(context + ": unknown key \"" + it.key() + "\"");
    }
}

Eigen::MatrixXd parse_matrix(const json& rows, const std::string& context) {
    if (!rows.is_array()) throw ConfigError(context + ": expected a nested array");
    const int nr = static_cast<int>(rows.size());
    int nc = -1;
    for (const auto& row : rows) {
        if (!row.is_array()) throw ConfigError(context + ": expected row-major nested arrays");
        if (nc < 0)
            nc = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != nc)
            throw ConfigError(context + ": ragged matrix rows");
    }
    if (nr == 0 || nc <= 0) return Eigen::MatrixXd(nr, std::max(nc, 0));
    Eigen::MatrixXd M(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) {
            const auto& v = rows[i][j];
            if (!v.is_number()) throw ConfigError(context + ": matrix entries must be numbers");
            M(i, j) = v.get<double>();
        }
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

StateSpace parse_system(const json& spec, const std::string& context) {
    require_keys(spec, {"ss", "tf"}, context);
    if (spec.contains("ss")) {
        const auto& ss = spec["ss"];
        require_keys(ss, {"A", "B", "C", "D"}, context + ".ss");
        for (const char* k : {"A", "B", "C", "D"})
            if (!ss.contains(k)) throw ConfigError(context + ".ss: missing matrix " + k);
        StateSpace sys;
        sys.A = parse_matrix(ss["A"], context + ".ss.A");
        sys.B = parse_matrix(ss["B"], context + ".ss.B");
        sys.C = parse_matrix(ss["C"], context + ".ss.C");
        sys.D = parse_matrix(ss["D"], context + ".ss.D");
        // Zero-state systems may arrive with empty arrays; fix inner dims.
        const int n = static_cast<int>(sys.D.rows());
        if (sys.A.rows() == 0) {
            sys.A.resize(0, 0);
            sys.B.resize(0, n);
            sys.C.resize(n, 0);
        }
        sys.validate();
        return sys;
    }
    if (spec.contains("tf")) {
        const auto& tf = spec["tf"];
        require_keys(tf, {"num", "den"}, context + ".tf");
        if (!tf.contains("num") || !tf.contains("den"))
            throw ConfigError(context + ".tf: needs num and den");
        TransferFunction t(tf["num"].get<std::vector<double>>(),
                           tf["den"].get<std::vector<double>>());
        return to_state_space(t);
    }
    throw ConfigError(context + ": system must be given as \"ss\" or \"tf\"");
}

InputFn parse_input(const json& spec, int n, const std::string& context) {
    require_keys(spec, {"type", "amplitude", "t_on", "omega", "phase", "seed"}, context);
    if (!spec.contains("type")) throw ConfigError(context + ": input needs a type");
    std::string type = spec["type"].get<std::string>();
    double amplitude = spec.value("amplitude", 1.0);
    if (type == "zero") return make_zero_input(n);
    if (type == "step") return make_step_input(n, amplitude, spec.value("t_on", 0.0));
    if (type == "sine")
        return make_sine_input(n, amplitude, spec.value("omega", 1.0), spec.value("phase", 0.0));
    if (type == "decaying_sum")
        return make_decaying_sum_input(n, spec.value("seed", std::uint64_t{0}));
    throw ConfigError(context + ": unknown input type \"" + type + "\"");
}

ResetSystem parse_reset_system(const json& spec, const std::string& context) {
    require_keys(spec, {"base", "R", "M", "delta"}, context);
    if (!spec.contains("base")) throw ConfigError(context + ": reset system needs a base");
    ResetSystem sys;
    sys.base = parse_system(spec["base"], context + ".base");
    const int m = sys.base.states();
    const int n = sys.base.size();
    if (!spec.contains("R")) throw ConfigError(context + ": reset system needs R");
    sys.R = parse_matrix(spec["R"], context + ".R");
    if (m == 0 && sys.R.size() == 0) sys.R.resize(0, 0);
    if (!spec.contains("M")) throw ConfigError(context + ": reset system needs M");
    if (spec["M"].is_object()) {
        require_keys(spec["M"], {"k1", "k2"}, context + ".M");
        sys.M = MStructure::build(sys.base, spec["M"].value("k1", 1.0), spec["M"].value("k2", 0.0)).M;
    } else {
        sys.M = parse_matrix(spec["M"], context + ".M");
        if (sys.M.rows() != m + n) throw ConfigError(context + ".M: wrong dimensions");
    }
    sys.delta = spec.value("delta", 1e-2);
    sys.validate();
    return sys;
}

std::vector<double> parse_grid(const json& spec, const std::string& context) {
    if (spec.is_array()) return spec.get<std::vector<double>>();
    require_keys(spec, {"min", "max", "count", "spacing"}, context);
    for (const char* k : {"min", "max", "count"})
        if (!spec.contains(k)) throw ConfigError(context + ": grid needs min/max/count");
    double lo = spec["min"].get<double>(), hi = spec["max"].get<double>();
    int count = spec["count"].get<int>();
    if (count < 1) throw ConfigError(context + ": grid count must be >= 1");
    std::string spacing = spec.value("spacing", "linear");
    if (spacing == "linear") return linspace(lo, hi, count);
    if (spacing == "log") {
        if (lo <= 0.0 || hi <= 0.0) throw ConfigError(context + ": log grid needs positive ends");
        return logspace(lo, hi, count);
    }
    throw ConfigError(context + ": unknown spacing \"" + spacing + "\"");
}

json region_to_json(const RegionApprox& rg) {
    json out;
    json cons = json::array();
    for (const auto& cc : rg.constraints)
        cons.push_back({{"a", cc.a}, {"b", cc.b}, {"c", cc.c}});
    out["constraints"] = cons;
    json prov = json::array();
    for (const auto& cert : rg.provenance.certificates)
        prov.push_back({{"sigma", cert.sigma},
                        {"lambda", cert.lambda},
                        {"r", cert.r},
                        {"psd", cert.psd},
                        {"residual", cert.residual},
                        {"scale", cert.scale}});
    out["provenance"] = prov;
    out["mu"] = rg.mu;
    out["nyquist_hull"] = rg.provenance.nyquist_hull;
    out["transformed"] = rg.provenance.transformed;
    out["eps_regularized"] = rg.provenance.eps_regularized;
    if (rg.provenance.eps_regularized) out["epsilon"] = rg.provenance.epsilon;
    out["indeterminate_seen"] = rg.provenance.indeterminate_seen;
    out["all_psd"] = rg.provenance.all_psd;
    return out;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string boundary_csv(const RegionApprox& rg, int per_constraint) {
    BoundarySamples bs = boundary_samples(rg, per_constraint);
    std::ostringstream os;
    os << "re,im,constraint_index\n";
    for (std::size_t i = 0; i < bs.points.size(); ++i)
        os << num(bs.points[i].real()) << ',' << num(bs.points[i].imag()) << ','
           << bs.constraint_index[i] << '\n';
    return os.str();
}

json certificate_to_json(const StabilityCertificate& cert) {
    json out;
    out["mode"] = cert.mode == StabilityMode::Soft ? "soft" : "hard";
    out["mu_grid"] = cert.mu_grid;
    out["distances"] = cert.distances;
    out["r_min"] = cert.r_min;
    out["stable"] = cert.stable;
    if (cert.gain_bound) out["gain_bound"] = *cert.gain_bound;
    out["chord_h1"] = cert.chord_h1;
    out["chord_patch"] = cert.chord_patch;
    out["sample_pitch"] = cert.sample_pitch;
    out["caveats"] = cert.caveats;
    return out;
}

json admissibility_to_json(const AdmissibilityReport& rep) {
    json out;
    out["admissible"] = rep.admissible;
    if (rep.shortcut_alpha) out["shortcut"] = "corollary1(" + num(*rep.shortcut_alpha) + ")";
    json per = json::array();
    for (const auto& e : rep.per_P) {
        std::string st = e.status == SolveStatus::Feasible
                             ? "feasible"
                             : (e.status == SolveStatus::Infeasible ? "infeasible"
                                                                    : "indeterminate");
        per.push_back(
            {{"lambda", e.lambda}, {"sigma", e.sigma}, {"status", st}, {"rho", e.rho}});
    }
    out["per_P"] = per;
    out["hypothesis_failures"] = rep.hypothesis_failures;
    return out;
}

namespace {

void write_signal_columns(std::ostringstream& os, const Eigen::MatrixXd& sig, int col) {
    for (int i = 0; i < sig.rows(); ++i) os << ',' << num(sig(i, col));
}

}  // namespace

std::string trace_csv(const SimTrace& tr) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < tr.u.rows(); ++i) os << ",u" << i;
    for (int i = 0; i < tr.y.rows(); ++i) os << ",y" << i;
    for (int i = 0; i < tr.x.rows(); ++i) os << ",x" << i;
    os << ",tau,jump_flag\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << num(tr.t[k]);
        write_signal_columns(os, tr.u, static_cast<int>(k));
        write_signal_columns(os, tr.y, static_cast<int>(k));
        write_signal_columns(os, tr.x, static_cast<int>(k));
        os << ',' << num(tr.tau[k]) << ',' << static_cast<int>(tr.jump_flag[k]) << '\n';
    }
    return os.str();
}

std::string trace_csv(const ClosedLoopTrace& tr) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < tr.u1.rows(); ++i) os << ",u1_" << i;
    for (int i = 0; i < tr.y1.rows(); ++i) os << ",y1_" << i;
    for (int i = 0; i < tr.u2.rows(); ++i) os << ",u2_" << i;
    for (int i = 0; i < tr.y2.rows(); ++i) os << ",y2_" << i;
    for (int i = 0; i < tr.x1.rows(); ++i) os << ",x1_" << i;
    for (int i = 0; i < tr.x2.rows(); ++i) os << ",x2_" << i;
    os << ",tau,jump_flag\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << num(tr.t[k]);
        write_signal_columns(os, tr.u1, static_cast<int>(k));
        write_signal_columns(os, tr.y1, static_cast<int>(k));
        write_signal_columns(os, tr.u2, static_cast<int>(k));
        write_signal_columns(os, tr.y2, static_cast<int>(k));
        write_signal_columns(os, tr.x1, static_cast<int>(k));
        write_signal_columns(os, tr.x2, static_cast<int>(k));
        os << ',' << num(tr.tau[k]) << ',' << static_cast<int>(tr.jump_flag[k]) << '\n';
    }
    return os.str();
}

json metrics_to_json(const StepMetrics& sm) {
    return {{"overshoot_pct", sm.overshoot_pct},
            {"settling_time", sm.settling_time},
            {"l2_u1", sm.l2_u1},
            {"l2_y1", sm.l2_y1},
            {"settled", sm.settled}};
}

json cloud_to_json(const std::vector<GainPhasePoint>& cloud) {
    json arr = json::array();
    for (const auto& p : cloud)
        arr.push_back(
            {{"rho", p.rho}, {"theta", p.theta}, {"T", p.T}, {"rho_inf", p.rho_inf}});
    return arr;
}

std::string cloud_csv(const std::vector<GainPhasePoint>& cloud) {
    std::ostringstream os;
    os << "rho,theta,T,re,im\n";
    for (const auto& p : cloud) {
        if (p.rho_inf) continue;
        os << num(p.rho) << ',' << num(p.theta) << ',' << num(p.T) << ','
           << num(p.rho * std::cos(p.theta)) << ',' << num(p.rho * std::sin(p.theta)) << '\n';
    }
    return os.str();
}

json design_result_to_json(const DesignResult& dr) {
    json out;
    json scored = json::array();
    for (const auto& sc : dr.scored) {
        json entry;
        entry["R"] = matrix_to_json(sc.candidate.R);
        entry["k1"] = sc.candidate.k1;
        entry["score"] = sc.score;
        entry["diverged"] = sc.diverged;
        entry["metrics"] = metrics_to_json(sc.metrics);
        scored.push_back(entry);
    }
    out["candidates"] = scored;
    out["selected"] = dr.selected;
    if (dr.selected >= 0) {
        out["selected_k1"] = dr.scored[dr.selected].candidate.k1;
        out["selected_R"] = matrix_to_json(dr.scored[dr.selected].candidate.R);
    }
    switch (dr.criterion) {
        case Criterion::L2U1: out["criterion"] = "l2_u1"; break;
        case Criterion::Overshoot: out["criterion"] = "overshoot"; break;
        case Criterion::Settling: out["criterion"] = "settling"; break;
    }
    if (!dr.config_echo.empty()) out["config_echo"] = dr.config_echo;
    return out;
}

std::string score_table_csv(const DesignResult& dr) {
    std::ostringstream os;
    os << "k1,R,score,overshoot_pct,settling_time,l2_u1,l2_y1,settled,diverged,selected\n";
    for (std::size_t i = 0; i < dr.scored.size(); ++i) {
        const auto& sc = dr.scored[i];
        std::ostringstream rs;
        rs << '"';
        for (int r = 0; r < sc.candidate.R.rows(); ++r)
            for (int c = 0; c < sc.candidate.R.cols(); ++c)
                rs << (r + c > 0 ? ";" : "") << num(sc.candidate.R(r, c));
        rs << '"';
        os << num(sc.candidate.k1) << ',' << rs.str() << ',' << num(sc.score) << ','
           << num(sc.metrics.overshoot_pct) << ',' << num(sc.metrics.settling_time) << ','
           << num(sc.metrics.l2_u1) << ',' << num(sc.metrics.l2_y1) << ','
           << (sc.metrics.settled ? 1 : 0) << ',' << (sc.diverged ? 1 : 0) << ','
           << (static_cast<int>(i) == dr.selected ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string canonical(const json& j) { return j.dump(); }

void stamp(json& out, const json& config) {
    out["config_hash"] = fnv1a_hex(canonical(config));
    out["tool_version"] = RESETGRAPH_VERSION;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << content;
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

}  // namespace resetgraph::io
