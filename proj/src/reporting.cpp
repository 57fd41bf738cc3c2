#include "lidskii/reporting.hpp"

#include "lidskii/rng.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace lidskii {

namespace {

struct GateRecord {
    std::string name;
    bool pass = false;
    double metric = 0.0;
};

struct OutputCollector {
    std::filesystem::path out_dir;
    Json outputs = Json::array();

    void write(const std::string& rel, const std::string& bytes) {
        const auto path = out_dir / rel;
        write_text(path, bytes);
        outputs.push_back({{"path", rel}, {"bytes", bytes.size()}, {"fnv64", fnv1a_hex(bytes)}});
    }
};

Vector vector_param(const Json& params, const std::string& key, int dim) {
    if (!params.contains(key) || (params[key].is_string() && params[key] == "ones"))
        return Vector::Ones(dim);
    return vector_from_json(params[key]);
}

std::vector<double> real_array(const Json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

/// Random structured operator for the seeded verification suite: distinct
/// positive-sector eigenvalue moduli, chains up to length 3, a well-conditioned
/// near-identity basis.
OperatorSpec random_structured(Rng& rng, int dimension) {
    std::vector<JordanBlock> blocks;
    int left = dimension;
    double modulus = 1.0;
    while (left > 0) {
        int size = 1 + static_cast<int>(rng.uniform() * 3.0);
        size = std::min(size, left);
        modulus *= 0.45 + 0.15 * rng.uniform();  // decreasing |mu| => increasing |lambda|
        const double ang = (rng.uniform() - 0.5) * 0.5;
        blocks.push_back({std::polar(modulus, ang), size});
        left -= size;
    }
    Matrix P = Matrix::Identity(dimension, dimension) + 0.25 * rng.normal_matrix(dimension, dimension);
    return make_structured_operator(blocks, P, "suite");
}

GateRecord gate(const std::string& name, bool pass, double metric) {
    return {name, pass, metric};
}

void run_full_verify(const ExperimentConfig& cfg, const std::vector<OperatorSpec>& loaded,
                     OutputCollector& files, std::vector<GateRecord>& gates) {
    std::vector<OperatorSpec> suite = loaded;
    if (suite.empty()) {
        Rng rng(*cfg.seed);
        const int count = cfg.params.value("suite_size", 4);
        const int dim = cfg.params.value("dimension", 6);
        for (int i = 0; i < count; ++i) suite.push_back(random_structured(rng, dim));
    }
    const double alpha = cfg.params.value("alpha", 2.0);
    const double t = cfg.params.value("t", 0.5);

    std::string csv = csv_line({"operator", "gate", "status", "metric"});
    int op_idx = 0;
    for (const auto& op : suite) {
        const std::string tag = "op" + std::to_string(op_idx++);
        auto push = [&](const std::string& name, bool pass, double metric) {
            gates.push_back(gate(tag + "/" + name, pass, metric));
            csv += csv_line({tag, name, pass ? "pass" : "fail", format_double(metric)});
        };

        SpectralDecomposition d = build_biorthogonal(decompose(op), op);
        Matrix E = d.root_matrix();
        Matrix G = d.adjoint_matrix();
        const double pairing =
            (G.adjoint() * E - Matrix::Identity(op.dimension, op.dimension)).cwiseAbs().maxCoeff();
        push("pairing-identity", pairing <= 1e-9, pairing);

        const double chain = chain_residual(d, op);
        push("chain-relations", chain <= 1e-8, chain);

        Rng probe_rng(cfg.seed.value_or(1) + 1000 + op_idx);
        Vector f = probe_rng.normal_vector(op.dimension);
        Vector raw = raw_coefficients(d, f);

        // residue identity on every group
        double worst_res = 0.0;
        RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
        int base = 0;
        for (const auto& grp : d.groups) {
            Vector formula = Vector::Zero(op.dimension);
            for (const auto& ch : grp.chains)
                for (const auto& e : ch.e) formula += ct.values[base++] * e;
            double radius = 0.45 * std::abs(grp.lambda());
            for (const auto& other : d.groups)
                if (&other != &grp)
                    radius = std::min(radius, 0.45 * std::abs(other.lambda() - grp.lambda()));
            Vector res = residue_at_pole(op, f, t, alpha, grp.lambda(), radius);
            worst_res = std::max(worst_res, relative_error(res, Vector(-formula)));
        }
        push("residue-identity", worst_res <= 1e-8, worst_res);

        // Theorem 2: contour integral vs all grouped sums
        double t2_metric = std::numeric_limits<double>::quiet_NaN();
        bool t2_ok = false;
        try {
            SectorEstimate sector = estimate_sector(op, std::max(64, 8 * op.dimension),
                                                    std::nullopt, cfg.seed.value_or(1) + 7);
            ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-11);
            QuadratureResult qr = integrate_resolvent_functional(op, f, t, alpha, c);
            SummationSchedule sched = group_schedule(d, 1.0 / (2.0 * alpha), 0.5);
            GroupedSums sums = grouped_partial_sums(d, ct, sched);
            t2_metric = relative_error(qr.value, sums.total);
            t2_ok = t2_metric <= 1e-6;
        } catch (const Error&) {
            t2_ok = false;
        }
        push("theorem2-identity", t2_ok, t2_metric);

        // regularized coefficients approach the raw ones
        RegularizedCoefficients small_t = regularized_coefficients(d, raw, 1e-8, alpha);
        const double limit_gap = (small_t.values - raw).cwiseAbs().maxCoeff();
        const double limit_tol = 1e-6 * (1.0 + raw.cwiseAbs().maxCoeff());
        push("abel-limit", limit_gap <= limit_tol, limit_gap);

        // Lemma 6 on one ray outside the sector
        SectorEstimate sec = estimate_sector(op, std::max(64, 8 * op.dimension), std::nullopt,
                                             cfg.seed.value_or(1) + 11);
        RayL6Params ray;
        ray.theta = sec.semi_angle;
        ray.psi = 0.5 * (sec.semi_angle + kPi);
        BoundCheck bc = verify_ray_bound(op, ray, 256);
        push("lemma6-ray", bc.satisfied, bc.max_violation);
    }
    files.write("gates.csv", csv);
}

void run_decompose(const ExperimentConfig& cfg, const std::vector<OperatorSpec>& ops,
                   OutputCollector& files, std::vector<GateRecord>& gates) {
    const double rank_tol = cfg.params.value("rank_tolerance", 1e-9);
    int idx = 0;
    for (const auto& op : ops) {
        SpectralDecomposition d = build_biorthogonal(decompose(op, rank_tol), op);
        files.write("decomposition_" + std::to_string(idx) + ".json", to_json(d).dump(2) + "\n");
        Matrix E = d.root_matrix();
        Matrix G = d.adjoint_matrix();
        const double pairing =
            (G.adjoint() * E - Matrix::Identity(op.dimension, op.dimension)).cwiseAbs().maxCoeff();
        gates.push_back(gate("pairing-identity/op" + std::to_string(idx), pairing <= 1e-9, pairing));
        ++idx;
    }
}

void run_analyze_exponent(const ExperimentConfig& cfg, OutputCollector& files,
                          std::vector<GateRecord>& gates) {
    const Json& p = cfg.params;
    ModulusSequence seq;
    if (p.contains("csv")) {
        seq = load_sequence_csv(p["csv"].get<std::string>());
    } else if (p.contains("model")) {
        const std::string kind = p["model"].get<std::string>();
        const long count = p.value("count", 100000L);
        if (kind == "e1")
            seq = generate_model_sequence_e1(p["rho"].get<double>(), count);
        else if (kind == "e2")
            seq = generate_model_sequence_e2(p["kappa"].get<double>(), p["q"].get<double>(), count);
        else
            throw Error("analyze-exponent: unknown model '" + kind + "'");
    } else {
        throw Error("analyze-exponent: params need either csv or model");
    }

    const long horizon = p.value("horizon", static_cast<long>(seq.size()));
    ExponentReport rep = convergence_exponent(seq, horizon);

    Json out;
    out["rho_hat"] = rep.rho_hat;
    out["genus"] = rep.genus;
    out["density_hat"] = rep.density_hat;
    out["fit_r_lo"] = rep.diagnostics.fit_r_lo;
    out["fit_r_hi"] = rep.diagnostics.fit_r_hi;
    out["fit_residual"] = rep.diagnostics.fit_residual;
    out["near_integer_rho"] = rep.diagnostics.near_integer;
    files.write("exponent_report.json", out.dump(2) + "\n");
    gates.push_back(gate("exponent-fit", true, rep.rho_hat));

    if (p.contains("r_grid") || p.contains("rho1")) {
        std::vector<double> grid;
        if (p.contains("r_grid"))
            grid = real_array(p["r_grid"]);
        else
            for (int k = 2; k <= 6; ++k) grid.push_back(std::pow(10.0, k));
        const int pp = p.value("p", rep.genus);
        const double rho1 = p.value("rho1", rep.genus + 0.5);
        BetaProfile prof = beta_profile(seq, pp, rho1, grid);
        std::string csv = csv_line({"r", "beta", "beta_ln_r"});
        for (std::size_t i = 0; i < prof.r.size(); ++i)
            csv += csv_line({format_double(prof.r[i]), format_double(prof.beta[i]),
                             format_double(prof.beta_ln_r[i])});
        files.write("beta.csv", csv);
    }
}

void run_sum(const ExperimentConfig& cfg, const std::vector<OperatorSpec>& ops,
             OutputCollector& files, std::vector<GateRecord>& gates) {
    if (ops.empty()) throw Error("sum: no operator given");
    const OperatorSpec& op = ops.front();
    const double alpha = cfg.params.value("alpha", 2.0);

    SpectralDecomposition d = build_biorthogonal(decompose(op), op);
    Vector f = vector_param(cfg.params, "f", op.dimension);
    Vector raw = raw_coefficients(d, f);

    const double tau = cfg.params.value("tau", 1.0 / (2.0 * alpha));
    const double K = cfg.params.value("K", 0.5);
    SummationSchedule sched = group_schedule(d, tau, K);

    Json sj;
    sj["tau"] = sched.tau;
    sj["K"] = sched.K;
    sj["boundaries"] = sched.boundaries;
    sj["single_group_fallback"] = sched.single_group_fallback;
    sj["in_group_max_ratio"] = sched.in_group_max_ratio;
    Json diag = Json::array();
    for (const auto& g : sched.diagnostics)
        diag.push_back({{"boundary", g.boundary}, {"gap", g.gap}, {"threshold", g.threshold}});
    sj["gap_diagnostics"] = std::move(diag);
    files.write("schedule.json", sj.dump(2) + "\n");

    std::vector<double> ts = cfg.params.contains("t_values")
                                 ? real_array(cfg.params["t_values"])
                                 : std::vector<double>{0.1, 1.0};
    Json totals = Json::array();
    for (std::size_t k = 0; k < ts.size(); ++k) {
        RegularizedCoefficients ct = regularized_coefficients(d, raw, ts[k], alpha);
        GroupedSums sums = grouped_partial_sums(d, ct, sched);

        std::string ccsv = csv_line({"index", "re", "im", "norm"});
        for (int i = 0; i < ct.values.size(); ++i)
            ccsv += csv_line({std::to_string(i), format_double(ct.values[i].real()),
                              format_double(ct.values[i].imag()),
                              format_double(std::abs(ct.values[i]))});
        files.write("coefficients_t" + std::to_string(k) + ".csv", ccsv);

        std::string gcsv = csv_line({"nu", "norm"});
        for (std::size_t nu = 0; nu < sums.group_norms.size(); ++nu)
            gcsv += csv_line({std::to_string(nu), format_double(sums.group_norms[nu])});
        files.write("group_norms_t" + std::to_string(k) + ".csv", gcsv);

        totals.push_back({{"t", ts[k]}, {"total", to_json(sums.total)}});
    }
    files.write("totals.json", totals.dump(2) + "\n");
    gates.push_back(gate("sum-completed", true, static_cast<double>(ts.size())));
}

void run_contour_verify(const ExperimentConfig& cfg, const std::vector<OperatorSpec>& ops,
                        OutputCollector& files, std::vector<GateRecord>& gates) {
    if (ops.empty()) throw Error("contour-verify: no operator given");
    const OperatorSpec& op = ops.front();
    const double alpha = cfg.params.value("alpha", 2.0);
    const double t = cfg.params.value("t", 0.5);
    const double tol = cfg.params.value("tolerance", 1e-11);

    SectorEstimate sector =
        estimate_sector(op, std::max(64, 8 * op.dimension), std::nullopt, *cfg.seed);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, tol);
    files.write("contour.json", to_json(c).dump(2) + "\n");

    Rng rng(*cfg.seed + 3);
    Vector f = rng.normal_vector(op.dimension);
    QuadratureResult qr = integrate_resolvent_functional(op, f, t, alpha, c, tol);

    // integrand trace along the contour, for plots
    std::string trace = csv_line({"re", "im", "integrand_norm"});
    for (const auto& seg : c.segments()) {
        for (int j = 0; j < 128; ++j) {
            const double s = (j + 0.5) / 128.0;
            Complex lam = seg.is_arc ? std::polar(seg.radius, seg.a0 + s * (seg.a1 - seg.a0))
                                     : seg.z0 + s * (seg.z1 - seg.z0);
            const double nrm =
                std::abs(std::exp(-principal_pow(lam, alpha) * t)) *
                (op.dense * resolvent_apply(op, lam, f)).norm();
            trace += csv_line({format_double(lam.real()), format_double(lam.imag()),
                               format_double(nrm)});
        }
    }
    files.write("trace.csv", trace);

    // residue cross-check
    SpectralDecomposition d = build_biorthogonal(decompose(op), op);
    Vector raw = raw_coefficients(d, f);
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    SummationSchedule sched = group_schedule(d, 1.0 / (2.0 * alpha), 0.5);
    GroupedSums sums = grouped_partial_sums(d, ct, sched);
    const double ident = relative_error(qr.value, sums.total);
    gates.push_back(gate("theorem2-identity", ident <= 1e-6, ident));

    SectorEstimate sec = sector;
    RayL6Params ray;
    ray.theta = sec.semi_angle;
    ray.psi = 0.5 * (sec.semi_angle + kPi);
    BoundCheck bc = verify_ray_bound(op, ray, 256);
    gates.push_back(gate("lemma6-ray", bc.satisfied, bc.max_violation));

    Json rep;
    rep["value"] = to_json(qr.value);
    rep["panel_error_estimate"] = qr.panel_error_estimate;
    rep["truncation_bound"] = qr.truncation_bound;
    rep["panels_used"] = qr.panels_used;
    rep["identity_rel_err"] = ident;
    files.write("contour_report.json", rep.dump(2) + "\n");
}

void run_evolve(const ExperimentConfig& cfg, const std::vector<OperatorSpec>& ops,
                OutputCollector& files, std::vector<GateRecord>& gates) {
    const Json& p = cfg.params;
    OperatorSpec W;
    if (p.contains("W") && p["W"].is_string())
        W = load_operator(p["W"].get<std::string>());
    else if (!ops.empty())
        W = ops.front();
    else
        throw Error("evolve: no operator given");

    const double alpha = p.value("alpha", 2.0);
    Vector h = vector_param(p, "h", W.dimension);
    std::vector<double> t_grid = p.contains("t_grid")
                                     ? real_array(p["t_grid"])
                                     : std::vector<double>{0.1, 0.2, 0.5, 1.0, 2.0};
    const std::string backend_name = p.value("backend", std::string("series"));
    EvolutionBackend backend = backend_name == "contour" ? EvolutionBackend::contour
                               : backend_name == "eigen" ? EvolutionBackend::eigen_oracle
                                                         : EvolutionBackend::series;

    CauchyProblem prob = make_cauchy_problem(W, h, alpha);
    Trajectory traj = solve_cauchy(prob, t_grid, backend, 1e-10, cfg.threads);

    // optional data-parallel map over grid points was already evaluated inside
    // solve_cauchy point by point; emit the table
    std::string tcsv = csv_line({"t", "component", "re", "im", "error_estimate"});
    for (std::size_t i = 0; i < traj.t_grid.size(); ++i)
        for (int k = 0; k < traj.values[i].size(); ++k)
            tcsv += csv_line({format_double(traj.t_grid[i]), std::to_string(k),
                              format_double(traj.values[i][k].real()),
                              format_double(traj.values[i][k].imag()),
                              format_double(traj.error_estimate[i])});
    files.write("trajectory.csv", tcsv);

    SolutionReport rep = verify_solution(prob, traj);
    std::string icsv = csv_line({"t", "err"});
    for (std::size_t k = 0; k < rep.initial_errors.size(); ++k)
        icsv += csv_line({format_double(std::pow(10.0, -static_cast<double>(k + 1))),
                          format_double(rep.initial_errors[k])});
    files.write("initial_trend.csv", icsv);

    Json vj;
    vj["residual_checked"] = rep.residual_checked;
    vj["max_residual"] = rep.max_residual;
    vj["residual_note"] = rep.residual_note;
    vj["initial_monotone"] = rep.initial_monotone;
    vj["initial_final_error"] = rep.initial_final_error;
    vj["contraction_checked"] = rep.contraction_checked;
    vj["contraction_ok"] = rep.contraction_ok;
    vj["contraction_note"] = rep.contraction_note;
    files.write("verify.json", vj.dump(2) + "\n");

    if (rep.residual_checked)
        gates.push_back(gate("rl-residual", rep.max_residual <= 1e-4, rep.max_residual));
    gates.push_back(gate("initial-monotone", rep.initial_monotone, rep.initial_final_error));
    if (rep.contraction_checked)
        gates.push_back(gate("contraction", rep.contraction_ok, 0.0));
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_config: cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("load_config: malformed JSON: " + std::string(e.what()));
    }
    ExperimentConfig cfg;
    cfg.name = j.value("name", std::string("experiment"));
    if (!j.contains("task")) throw Error("load_config: missing task");
    cfg.task = j["task"].get<std::string>();
    if (j.contains("operators"))
        for (const auto& p : j["operators"]) cfg.operator_paths.emplace_back(p.get<std::string>());
    cfg.params = j.value("params", Json::object());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

int run_experiment(const ExperimentConfig& config) {
    std::vector<GateRecord> gates;
    OutputCollector files;
    files.out_dir = config.out_dir;

    // validate everything before any computation starts
    std::vector<OperatorSpec> ops;
    try {
        static const char* kTasks[] = {"analyze-exponent", "decompose",      "sum",
                                       "contour-verify",   "evolve",         "full-verify"};
        bool known = false;
        for (const char* t : kTasks) known = known || config.task == t;
        if (!known) throw Error("run_experiment: unknown task '" + config.task + "'");

        for (const auto& p : config.operator_paths) {
            if (!std::filesystem::exists(p)) throw Error("missing matrix file " + p.string());
            OperatorSpec op = load_operator(p);
            validate_operator(op);
            ops.push_back(std::move(op));
        }
        const bool randomized = config.task == "full-verify" || config.task == "contour-verify";
        if (randomized && !config.seed)
            throw Error("run_experiment: task '" + config.task + "' requires a seed");
    } catch (const Error& e) {
        // input error: no partial outputs
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }

    try {
        if (config.task == "full-verify")
            run_full_verify(config, ops, files, gates);
        else if (config.task == "decompose")
            run_decompose(config, ops, files, gates);
        else if (config.task == "analyze-exponent")
            run_analyze_exponent(config, files, gates);
        else if (config.task == "sum")
            run_sum(config, ops, files, gates);
        else if (config.task == "contour-verify")
            run_contour_verify(config, ops, files, gates);
        else if (config.task == "evolve")
            run_evolve(config, ops, files, gates);
    } catch (const Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }

    bool all_pass = true;
    Json jgates = Json::array();
    for (const auto& g : gates) {
        all_pass = all_pass && g.pass;
        Json jg;
        jg["name"] = g.name;
        jg["status"] = g.pass ? "pass" : "fail";
        if (std::isfinite(g.metric)) jg["metric"] = g.metric;
        jgates.push_back(std::move(jg));
    }

    Json manifest;
    manifest["name"] = config.name;
    manifest["task"] = config.task;
    if (config.seed) manifest["seed"] = *config.seed;
    manifest["params"] = config.params;
    manifest["gates"] = std::move(jgates);
    manifest["outputs"] = files.outputs;
    manifest["status"] = all_pass ? "pass" : "fail";
    write_text(config.out_dir / "manifest.json", manifest.dump(2) + "\n");

    return all_pass ? 0 : 1;
}

}  // namespace lidskii
