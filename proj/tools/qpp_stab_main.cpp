// qpp-stab: parse system files, validate decompositions, run the stability
// pipeline, build certificates, integrate with drift monitoring, and
// regenerate the bundled example corpus with its reproduction report.

#include "qpstab/acceptance.hpp"
#include "qpstab/qpstab.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace qpstab;

constexpr int kOk = 0;
constexpr int kError = 1;   // unreadable/malformed input, bad usage, I/O failure
constexpr int kRefused = 2; // well-formed input with a negative result: failed
                            // validation, refused certificate, divergence

struct ToleranceFlags {
    double poisson = Tolerances{}.poisson;
    double fixed_point = Tolerances{}.fixed_point;
    double kernel = Tolerances{}.kernel_rel;
};

json tolerances_json(const ToleranceFlags& t) {
    return json{{"poisson", t.poisson}, {"fixed_point", t.fixed_point}, {"kernel", t.kernel}};
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    out << j.dump(2) << '\n';
}

VectorXd to_vector(const std::vector<double>& v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

json system_summary(const QPSystem& sys) {
    return json{{"n", sys.n()},
                {"m", sys.m()},
                {"rank_B", sys.rank_B()},
                {"theorem1_eligible", sys.theorem1_eligible()},
                {"lotka_volterra_form", sys.lv_form()}};
}

int cmd_validate(const std::string& input, const std::string& output, const ToleranceFlags& tols) {
    json rep{{"input", input}, {"tolerances", tolerances_json(tols)}};

    std::ifstream in(input);
    if (!in) {
        rep["valid"] = false;
        rep["error"] = "cannot open file";
        emit(rep, output);
        return kError;
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        rep["valid"] = false;
        rep["error"] = e.what();
        emit(rep, output);
        return kError;
    }

    json system_part = j;
    json poisson_part;
    const bool has_poisson = system_part.is_object() && system_part.contains("poisson");
    if (has_poisson) {
        poisson_part = system_part["poisson"];
        system_part.erase("poisson");
    }

    std::optional<QPSystem> sys;
    try {
        sys = parse_system(system_part).system;
    } catch (const std::exception& e) {
        rep["valid"] = false;
        rep["error"] = e.what();
        emit(rep, output);
        return kError;
    }
    rep["system"] = system_summary(*sys);

    if (!has_poisson) {
        rep["decomposition"] = nullptr;
        if (sys->lv_form()) {
            const LvRecovery rec = recover_decomposition_lv(*sys, tols.poisson);
            json rj{{"note", rec.note}, {"lambda_residual", rec.lambda_residual}};
            if (rec.data) {
                const PoissonCheck chk = check_poisson_conditions(*sys, *rec.data, tols.poisson);
                rj["valid"] = chk.verdict;
                rj["K"] = detail::matrix_to_json(rec.data->K());
                rj["L"] = detail::vector_to_json(rec.data->L());
                rj["D"] = detail::vector_to_json(rec.data->D());
                rj["d_sign"] = to_string(classify_diagonal(rec.data->D()));
            } else {
                rj["valid"] = false;
            }
            rep["recovery"] = rj;
        } else {
            rep["recovery"] = nullptr;
            rep["note"] = "no decomposition supplied; automatic recovery needs Lotka-Volterra form";
        }
        rep["valid"] = true; // the file itself is well-formed
        emit(rep, output);
        return kOk;
    }

    try {
        const SystemFile sf = parse_system(j);
        const PoissonCheck chk = check_poisson_conditions(*sys, *sf.poisson, tols.poisson);
        rep["decomposition"] = json{{"valid", chk.verdict},
                                    {"lambda_residual", chk.lambda_residual},
                                    {"A_residual", chk.A_residual},
                                    {"skewness_defect", chk.skewness},
                                    {"theorem1_eligible", chk.theorem1_eligible},
                                    {"d_sign", to_string(classify_diagonal(sf.poisson->D()))}};
        rep["valid"] = chk.verdict;
        emit(rep, output);
        return chk.verdict ? kOk : kRefused;
    } catch (const std::exception& e) {
        // A triple that is structurally wrong (non-skew K, zero D entry, bad
        // shapes) never reaches the residual checks; surface the defect anyway.
        json dj{{"valid", false}, {"error", e.what()}};
        if (poisson_part.is_object() && poisson_part.contains("K")) {
            try {
                const MatrixXd K =
                    detail::parse_matrix(poisson_part["K"], sys->n(), sys->n(), "poisson.K");
                dj["skewness_defect"] = skewness_defect(K);
            } catch (...) {
            }
        }
        rep["decomposition"] = dj;
        rep["valid"] = false;
        emit(rep, output);
        return kRefused;
    }
}

int cmd_analyze(const std::string& input, const std::string& output, const ToleranceFlags& tols) {
    const SystemFile sf = load_system(input);
    const AnalysisResult res = analyze(sf.system, sf.poisson, tols.poisson);

    json rep{{"input", input}, {"tolerances", tolerances_json(tols)}};
    rep["system"] = system_summary(sf.system);
    rep["report"] = report_to_json(res.report);

    if (res.poisson) {
        json dj{{"K", detail::matrix_to_json(res.poisson->K())},
                {"L", detail::vector_to_json(res.poisson->L())},
                {"D", detail::vector_to_json(res.poisson->D())},
                {"source", sf.poisson ? "file" : "recovered"}};
        if (res.check) {
            dj["lambda_residual"] = res.check->lambda_residual;
            dj["A_residual"] = res.check->A_residual;
            dj["skewness_defect"] = res.check->skewness;
        }
        rep["decomposition"] = dj;
    } else {
        rep["decomposition"] = nullptr;
    }

    if (res.family) {
        json kb = json::array();
        for (const auto& v : res.family->kernel_basis) kb.push_back(detail::vector_to_json(v));
        rep["family"] = json{{"coordinates", "lotka-volterra representative"},
                             {"base", detail::vector_to_json(res.family->base)},
                             {"kernel_basis", kb},
                             {"parameters", res.family->parameters()}};
    } else {
        rep["family"] = nullptr;
    }

    json cas = json::array();
    for (const auto& c : res.casimirs_original) cas.push_back(functional_to_json(c));
    rep["casimirs"] = cas;
    json casr = json::array();
    for (const auto& c : res.casimirs_representative) casr.push_back(functional_to_json(c));
    rep["casimirs_representative"] = casr;

    json pts = json::array();
    for (const auto& p : res.fixed_points) pts.push_back(detail::vector_to_json(p));
    rep["fixed_points"] = pts;

    if (res.dissipation) {
        rep["dissipation"] = json{{"classification", to_string(res.dissipation->classification)},
                                  {"eigenvalues", detail::vector_to_json(res.dissipation->eigenvalues)}};
    } else {
        rep["dissipation"] = nullptr;
    }

    emit(rep, output);
    return kOk;
}

int cmd_lyapunov(const std::string& input, const std::string& output, const std::vector<double>& point,
                 std::optional<double> kappa, const ToleranceFlags& tols) {
    const SystemFile sf = load_system(input);
    const QPSystem& sys = sf.system;

    std::optional<PoissonData> pd = sf.poisson;
    std::string source = "file";
    if (!pd && sys.lv_form()) {
        LvRecovery rec = recover_decomposition_lv(sys, tols.poisson);
        if (rec.data) {
            pd = std::move(rec.data);
            source = "recovered";
        }
    }
    if (!pd)
        throw std::runtime_error(
            "no decomposition available: supply a 'poisson' block or a Lotka-Volterra-form system");
    const PoissonCheck chk = check_poisson_conditions(sys, *pd, tols.poisson);
    if (!chk.verdict) throw std::runtime_error("decomposition conditions fail: " + chk.summary());

    const LvReduction red = to_lotka_volterra(sys, pd);
    const PoissonData& pd_lv = *red.pd_lv;
    const FixedPointFamily fam = fixed_point_family(pd_lv);

    json rep{{"input", input},
             {"tolerances", tolerances_json(tols)},
             {"decomposition_source", source}};

    VectorXd x_orig, x_lv;
    if (kappa) {
        if (fam.parameters() != 1)
            throw std::runtime_error("--kappa needs a one-parameter fixed-point family; this system has " +
                                     std::to_string(fam.parameters()) + " parameter(s)");
        x_lv = fam.member(*kappa);
        rep["kappa_requested"] = *kappa;
        if (!(x_lv.array() > 0.0).all()) {
            rep["refused"] = true;
            rep["reason"] = "family member at this parameter leaves the positive orthant";
            rep["point_representative"] = detail::vector_to_json(x_lv);
            emit(rep, output);
            return kRefused;
        }
        x_orig = map_point(red.record, x_lv, MapDirection::Inverse);
    } else {
        if (point.empty()) throw std::runtime_error("supply --point x1,...,xn or --kappa K");
        x_orig = to_vector(point);
        if (x_orig.size() != sys.n())
            throw std::runtime_error("--point must have " + std::to_string(sys.n()) + " coordinates");
        if (!(x_orig.array() > 0.0).all()) throw std::runtime_error("--point must be strictly positive");
        x_lv = map_point(red.record, x_orig, MapDirection::Forward);
    }
    rep["point"] = detail::vector_to_json(x_orig);
    rep["point_representative"] = detail::vector_to_json(x_lv);

    LyapunovOutcome outcome;
    try {
        outcome = lyapunov_for_point(pd_lv, x_lv, tols.fixed_point, tols.kernel);
    } catch (const std::invalid_argument& e) {
        rep["refused"] = true;
        rep["reason"] = e.what();
        emit(rep, output);
        return kRefused;
    }
    if (!outcome.ok()) {
        rep["refused"] = true;
        rep["reason"] = outcome.reason;
        emit(rep, output);
        return kRefused;
    }

    const LyapunovCertificate& cert = *outcome.certificate;
    const QPFunctional mapped = map_functional(red.record, cert.functional, MapDirection::Inverse);
    rep["refused"] = false;
    rep["functional"] = functional_to_json(mapped);
    rep["functional_representative"] = functional_to_json(cert.functional);
    rep["hessian_diag"] = detail::vector_to_json(cert.hessian_diag);
    rep["casimir_coefficients"] = detail::vector_to_json(cert.casimir_coefficients);
    rep["kernel_residual"] = cert.kernel_residual;
    rep["gradient_norm"] = max_abs(mapped.gradient(x_orig));
    if (fam.parameters() > 0) {
        MatrixXd km(pd_lv.m(), fam.parameters());
        for (int i = 0; i < fam.parameters(); ++i) km.col(i) = fam.kernel_basis[static_cast<std::size_t>(i)];
        rep["kappa"] = detail::vector_to_json(lstsq(km, cert.casimir_coefficients));
    } else {
        rep["kappa"] = json::array();
    }
    emit(rep, output);
    return kOk;
}

int cmd_simulate(const std::string& input, const std::string& output, const std::vector<double>& point,
                 double t_end, double step, std::optional<double> kappa, const std::string& format,
                 const ToleranceFlags& tols) {
    const SystemFile sf = load_system(input);
    const QPSystem& sys = sf.system;
    if (point.empty()) throw std::runtime_error("supply the initial state with --point x1,...,xn");
    const VectorXd x0 = to_vector(point);
    if (x0.size() != sys.n())
        throw std::runtime_error("--point must have " + std::to_string(sys.n()) + " coordinates");
    if (!(x0.array() > 0.0).all()) throw std::runtime_error("--point must be strictly positive");

    std::optional<PoissonData> pd = sf.poisson;
    std::string note;
    if (!pd && sys.lv_form()) {
        LvRecovery rec = recover_decomposition_lv(sys, tols.poisson);
        if (rec.data) {
            pd = std::move(rec.data);
            note = "decomposition recovered from the interaction matrix";
        }
    }
    if (pd && !check_poisson_conditions(sys, *pd, tols.poisson).verdict) {
        note = "decomposition fails its conditions; no invariants tracked";
        pd.reset();
    }

    std::vector<std::pair<std::string, QPFunctional>> tracked;
    if (pd) {
        tracked.emplace_back("H", hamiltonian_from_decomposition(sys, *pd, tols.poisson));
        const auto cas = casimirs(*pd);
        for (std::size_t i = 0; i < cas.size(); ++i) tracked.emplace_back("C" + std::to_string(i + 1), cas[i]);
        if (kappa) {
            const LvReduction red = to_lotka_volterra(sys, pd);
            const FixedPointFamily fam = fixed_point_family(*red.pd_lv);
            if (fam.parameters() != 1)
                throw std::runtime_error("--kappa needs a one-parameter fixed-point family");
            const LyapunovOutcome out =
                lyapunov_for_point(*red.pd_lv, fam.member(*kappa), tols.fixed_point, tols.kernel);
            if (!out.ok()) throw std::runtime_error("certificate at --kappa refused: " + out.reason);
            tracked.emplace_back(
                "H_C", map_functional(red.record, out.certificate->functional, MapDirection::Inverse));
        }
    } else if (kappa) {
        throw std::runtime_error("--kappa needs a valid decomposition");
    }

    bool diverged = false;
    std::string divergence_reason;
    Trajectory traj;
    try {
        traj = integrate(sys, x0, t_end, step);
    } catch (const divergence_error& e) {
        traj = e.partial();
        diverged = true;
        divergence_reason = e.what();
    }

    const bool csv_to_stdout = (format == "csv") && output.empty();
    if (!output.empty()) write_trajectory_csv(output, traj, tracked);
    if (csv_to_stdout) write_trajectory_csv(std::cout, traj, tracked);

    if (!csv_to_stdout) {
        json rep{{"input", input},
                 {"tolerances", tolerances_json(tols)},
                 {"step", step},
                 {"t_end", t_end},
                 {"samples", traj.size()},
                 {"initial", detail::vector_to_json(traj.states.front())},
                 {"final", detail::vector_to_json(traj.states.back())},
                 {"diverged", diverged},
                 {"csv", output.empty() ? json(nullptr) : json(output)}};
        if (!note.empty()) rep["note"] = note;
        if (diverged) rep["reason"] = divergence_reason;
        json drifts = json::object();
        for (const auto& [name, f] : tracked) {
            const Drift d = functional_drift(traj, f);
            drifts[name] = json{{"max_abs", d.max_abs}, {"relative", d.relative}};
        }
        rep["drifts"] = drifts;
        if (const auto pp = measure_period_and_phase(traj))
            rep["oscillation"] = json{{"period", pp->period}, {"phase_lag", pp->phase_lag}};
        else
            rep["oscillation"] = nullptr;
        std::cout << rep.dump(2) << '\n';
    }
    return diverged ? kRefused : kOk;
}

int cmd_examples(const std::string& outdir_flag, const ToleranceFlags& tols) {
    namespace fs = std::filesystem;
    const fs::path outdir = outdir_flag.empty() ? fs::path(".") : fs::path(outdir_flag);
    fs::create_directories(outdir);

    const std::vector<std::pair<std::string, ExampleSystem>> corpus = {
        {"volterra2d.json", make_volterra2d()},
        {"example2.json", make_example2(2.0, 1.0, 1.0, 2.0)},
        {"example3.json", make_example3(-1.0, -1.0, 0.5, 0.5)},
        {"nutku3d.json", make_nutku(-1.0, -1.0, -1.0, 1.0, 1.0)},
    };

    json files = json::array();
    bool round_trip = true;
    for (const auto& [name, ex] : corpus) {
        const std::string path = (outdir / name).string();
        save_system(path, ex.system, ex.poisson);
        const SystemFile sf = load_system(path);
        const bool ok =
            sf.poisson && check_poisson_conditions(sf.system, *sf.poisson, tols.poisson).verdict;
        round_trip = round_trip && ok;
        files.push_back(json{{"file", path}, {"revalidates", ok}});
    }

    const auto criteria = acceptance::run_all();
    bool all_pass = round_trip;
    json cj = json::array();
    for (const auto& c : criteria) {
        all_pass = all_pass && c.pass;
        json checks = json::array();
        for (const auto& chk : c.checks)
            checks.push_back(json{{"name", chk.name}, {"pass", chk.pass}, {"detail", chk.detail}});
        cj.push_back(json{{"index", c.index},
                          {"title", c.title},
                          {"pass", c.pass},
                          {"seconds", c.seconds},
                          {"checks", checks}});
        std::ostringstream line;
        line.precision(2);
        line << (c.pass ? "PASS" : "FAIL") << "  " << c.index << ". " << c.title << "  ("
             << c.checks.size() << " checks, " << std::fixed << c.seconds << " s)";
        std::cout << line.str() << '\n';
        if (!c.pass)
            for (const auto& chk : c.checks)
                if (!chk.pass)
                    std::cout << "      failing: " << chk.name
                              << (chk.detail.empty() ? "" : " [" + chk.detail + "]") << '\n';
    }
    std::cout << (round_trip ? "PASS" : "FAIL") << "  corpus files re-validate" << '\n';

    json rep{{"output_dir", outdir.string()}, {"seed", default_seed()},
             {"tolerances", tolerances_json(tols)}, {"files", files},
             {"round_trip", round_trip},          {"criteria", cj},
             {"all_pass", all_pass}};
    const std::string report_path = (outdir / "acceptance_report.json").string();
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open '" + report_path + "' for writing");
    out << rep.dump(2) << '\n';
    std::cout << (all_pass ? "all checks green" : "CHECKS FAILED") << "; report written to "
              << report_path << '\n';
    return all_pass ? kOk : kError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local stability toolkit for quasipolynomial conservative systems"};
    app.require_subcommand(1);

    std::string input, output;
    std::vector<double> point;
    double t_end = 100.0, step = 1e-3, kappa_val = 0.0;
    std::string format = "json";
    ToleranceFlags tols;

    auto* validate = app.add_subcommand("validate", "Check a system file and its decomposition");
    validate->add_option("--input", input, "system JSON file")->required();
    validate->add_option("--output", output, "write the JSON report here instead of stdout");
    validate->add_option("--tol", tols.poisson, "residual tolerance for the decomposition conditions");

    auto* analyze_cmd =
        app.add_subcommand("analyze", "Reduce, classify D, and describe fixed points and Casimirs");
    analyze_cmd->add_option("--input", input, "system JSON file")->required();
    analyze_cmd->add_option("--output", output, "write the JSON report here instead of stdout");
    analyze_cmd->add_option("--tol", tols.poisson, "residual tolerance for the decomposition conditions");

    auto* lyap = app.add_subcommand("lyapunov", "Build the functional certifying a fixed point");
    lyap->add_option("--input", input, "system JSON file")->required();
    lyap->add_option("--output", output, "write the JSON report here instead of stdout");
    auto* lyap_point =
        lyap->add_option("--point", point, "fixed point x1,...,xn in original coordinates")->delimiter(',');
    auto* lyap_kappa = lyap->add_option("--kappa", kappa_val, "family parameter instead of coordinates");
    lyap_point->excludes(lyap_kappa);
    lyap->add_option("--tol", tols.fixed_point, "how far from fixed the point may be");
    lyap->add_option("--kernel-tol", tols.kernel, "relative tolerance of the Casimir-direction check");

    auto* sim = app.add_subcommand("simulate", "Integrate the flow and monitor invariant drift");
    sim->add_option("--input", input, "system JSON file")->required();
    sim->add_option("--output", output, "trajectory CSV path");
    sim->add_option("--point", point, "initial state x1,...,xn")->delimiter(',')->required();
    sim->add_option("--t-end", t_end, "integration horizon (default 100)");
    sim->add_option("--step", step, "integrator step (default 1e-3)");
    auto* sim_kappa =
        sim->add_option("--kappa", kappa_val, "also track the certificate at this family member");
    sim->add_option("--format", format, "json summary or csv to stdout (default json)")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* ex = app.add_subcommand("examples", "Write the bundled corpus and run the reproduction suite");
    ex->add_option("--output", output, "directory for the corpus and report (default: current)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(input, output, tols);
        if (analyze_cmd->parsed()) return cmd_analyze(input, output, tols);
        if (lyap->parsed()) {
            std::optional<double> kappa;
            if (lyap_kappa->count() > 0) kappa = kappa_val;
            return cmd_lyapunov(input, output, point, kappa, tols);
        }
        if (sim->parsed()) {
            std::optional<double> kappa;
            if (sim_kappa->count() > 0) kappa = kappa_val;
            return cmd_simulate(input, output, point, t_end, step, kappa, format, tols);
        }
        if (ex->parsed()) return cmd_examples(output, tols);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
