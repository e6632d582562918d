#pragma once

// Serialization boundary: strict JSON system files (unknown fields are
// rejected so typos cannot silently change a model), report/record/functional
// JSON shapes, and plot-ready CSV trajectories with round-trip-exact decimal
// formatting.

#include "qpstab/simulate.hpp"
#include "qpstab/stability.hpp"
#include "qpstab/system.hpp"
#include "qpstab/transforms.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qpstab {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_fields(const json& j, std::initializer_list<const char*> allowed,
                                  const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw std::invalid_argument(where + ": unknown field '" + item.key() + "'");
    }
}

inline const json& require_field(const json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(where + ": missing field '" + key + "'");
    return *it;
}

inline int parse_positive_int(const json& j, const char* key, const std::string& where) {
    const json& v = require_field(j, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw std::invalid_argument(where + ": field '" + key + "' must be a positive integer");
    return v.get<int>();
}

inline VectorXd parse_vector(const json& v, Eigen::Index size, const std::string& field) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != size)
        throw std::invalid_argument("field '" + field + "' must be an array of " + std::to_string(size) +
                                    " numbers");
    VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const json& e = v[static_cast<std::size_t>(i)];
        if (!e.is_number())
            throw std::invalid_argument("field '" + field + "' entry " + std::to_string(i + 1) +
                                        " is not a number");
        out(i) = e.get<double>();
    }
    return out;
}

inline MatrixXd parse_matrix(const json& v, Eigen::Index rows, Eigen::Index cols, const std::string& field) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows)
        throw std::invalid_argument("field '" + field + "' must be an array of " + std::to_string(rows) +
                                    " rows");
    MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        out.row(r) = parse_vector(v[static_cast<std::size_t>(r)], cols,
                                  field + "' row '" + std::to_string(r + 1))
                         .transpose();
    return out;
}

inline json vector_to_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline json matrix_to_json(const MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) out.push_back(vector_to_json(M.row(r).transpose()));
    return out;
}

/// Shortest decimal digits that reproduce the double exactly on read-back.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

struct SystemFile {
    QPSystem system;
    std::optional<PoissonData> poisson;
};

inline SystemFile parse_system(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("system file: top-level value must be an object");
    detail::reject_unknown_fields(j, {"n", "m", "lambda", "A", "B", "poisson"}, "system file");
    const int n = detail::parse_positive_int(j, "n", "system file");
    const int m = detail::parse_positive_int(j, "m", "system file");
    VectorXd lambda = detail::parse_vector(detail::require_field(j, "lambda", "system file"), n, "lambda");
    MatrixXd A = detail::parse_matrix(detail::require_field(j, "A", "system file"), n, m, "A");
    MatrixXd B = detail::parse_matrix(detail::require_field(j, "B", "system file"), m, n, "B");
    QPSystem sys(std::move(lambda), std::move(A), std::move(B));

    std::optional<PoissonData> pd;
    if (const auto it = j.find("poisson"); it != j.end()) {
        const json& p = *it;
        if (!p.is_object()) throw std::invalid_argument("system file: field 'poisson' must be an object");
        detail::reject_unknown_fields(p, {"K", "L", "D"}, "poisson");
        MatrixXd K = detail::parse_matrix(detail::require_field(p, "K", "poisson"), n, n, "K");
        VectorXd L = detail::parse_vector(detail::require_field(p, "L", "poisson"), n, "L");
        VectorXd D = detail::parse_vector(detail::require_field(p, "D", "poisson"), m, "D");
        pd.emplace(std::move(K), std::move(L), std::move(D));
    }
    return SystemFile{std::move(sys), std::move(pd)};
}

inline SystemFile load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return parse_system(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("'" + path + "': " + e.what());
    }
}

inline json system_to_json(const QPSystem& sys, const std::optional<PoissonData>& pd = std::nullopt) {
    json j;
    j["n"] = sys.n();
    j["m"] = sys.m();
    j["lambda"] = detail::vector_to_json(sys.lambda());
    j["A"] = detail::matrix_to_json(sys.A());
    j["B"] = detail::matrix_to_json(sys.B());
    if (pd) {
        json p;
        p["K"] = detail::matrix_to_json(pd->K());
        p["L"] = detail::vector_to_json(pd->L());
        p["D"] = detail::vector_to_json(pd->D());
        j["poisson"] = std::move(p);
    }
    return j;
}

inline void save_system(const std::string& path, const QPSystem& sys,
                        const std::optional<PoissonData>& pd = std::nullopt) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << system_to_json(sys, pd).dump(2) << '\n';
}

inline json functional_to_json(const QPFunctional& f) {
    json j;
    j["coeffs"] = detail::vector_to_json(f.coeffs());
    j["exponents"] = detail::matrix_to_json(f.exponents());
    j["logcoeffs"] = detail::vector_to_json(f.logcoeffs());
    j["constant"] = f.constant();
    return j;
}

inline QPFunctional functional_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("functional: expected an object");
    detail::reject_unknown_fields(j, {"coeffs", "exponents", "logcoeffs", "constant"}, "functional");
    const json& jl = detail::require_field(j, "logcoeffs", "functional");
    if (!jl.is_array()) throw std::invalid_argument("functional: field 'logcoeffs' must be an array");
    const auto n = static_cast<Eigen::Index>(jl.size());
    VectorXd logc = detail::parse_vector(jl, n, "logcoeffs");
    const json& jc = detail::require_field(j, "coeffs", "functional");
    if (!jc.is_array()) throw std::invalid_argument("functional: field 'coeffs' must be an array");
    const auto p = static_cast<Eigen::Index>(jc.size());
    VectorXd coeffs = detail::parse_vector(jc, p, "coeffs");
    MatrixXd expo = detail::parse_matrix(detail::require_field(j, "exponents", "functional"), p, n, "exponents");
    double constant = 0.0;
    if (const auto it = j.find("constant"); it != j.end()) {
        if (!it->is_number()) throw std::invalid_argument("functional: field 'constant' must be a number");
        constant = it->get<double>();
    }
    return QPFunctional(std::move(coeffs), std::move(expo), std::move(logc), constant);
}

inline json report_to_json(const StabilityReport& rep) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    j["d_sign"] = to_string(rep.d_sign);
    j["lyapunov"] = rep.lyapunov ? functional_to_json(*rep.lyapunov) : json(nullptr);
    j["hessian_diag"] = rep.hessian_diag ? detail::vector_to_json(*rep.hessian_diag) : json(nullptr);
    j["notes"] = rep.notes;
    return j;
}

inline json record_to_json(const TransformRecord& rec) {
    json steps = json::array();
    for (const auto& step : rec.steps()) {
        json s;
        if (const auto* e = std::get_if<EmbedStep>(&step)) {
            s["type"] = "embed";
            s["b_prime"] = detail::matrix_to_json(e->b_prime);
            s["added"] = e->added;
        } else if (const auto* q = std::get_if<QmtStep>(&step)) {
            s["type"] = "qmt";
            s["gamma"] = detail::matrix_to_json(q->gamma);
        } else {
            const auto& d = std::get<DecoupleStep>(step);
            s["type"] = "decouple";
            s["kept"] = d.kept;
            s["full_dim"] = d.full_dim;
        }
        steps.push_back(std::move(s));
    }
    return steps;
}

inline TransformRecord record_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("transform record: expected an array of steps");
    TransformRecord rec;
    for (const json& s : j) {
        if (!s.is_object()) throw std::invalid_argument("transform record: each step must be an object");
        const json& t = detail::require_field(s, "type", "transform step");
        if (!t.is_string()) throw std::invalid_argument("transform step: field 'type' must be a string");
        const std::string type = t.get<std::string>();
        if (type == "embed") {
            detail::reject_unknown_fields(s, {"type", "b_prime", "added"}, "embed step");
            const int added = detail::parse_positive_int(s, "added", "embed step");
            const json& bp = detail::require_field(s, "b_prime", "embed step");
            if (!bp.is_array() || bp.empty())
                throw std::invalid_argument("embed step: field 'b_prime' must be a nonempty array of rows");
            rec.push_embed(
                detail::parse_matrix(bp, static_cast<Eigen::Index>(bp.size()), added, "b_prime"));
        } else if (type == "qmt") {
            detail::reject_unknown_fields(s, {"type", "gamma"}, "qmt step");
            const json& g = detail::require_field(s, "gamma", "qmt step");
            if (!g.is_array() || g.empty())
                throw std::invalid_argument("qmt step: field 'gamma' must be a nonempty square matrix");
            const auto dim = static_cast<Eigen::Index>(g.size());
            rec.push_qmt(detail::parse_matrix(g, dim, dim, "gamma"));
        } else if (type == "decouple") {
            detail::reject_unknown_fields(s, {"type", "kept", "full_dim"}, "decouple step");
            rec.push_decouple(detail::parse_positive_int(s, "kept", "decouple step"),
                              detail::parse_positive_int(s, "full_dim", "decouple step"));
        } else {
            throw std::invalid_argument("transform record: unknown step type '" + type + "'");
        }
    }
    return rec;
}

/// CSV with header t,x1,...,xn and optional named drift columns holding
/// f(x(t)) - f(x(0)). Every number is written with 17 significant digits.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                                 const std::vector<std::pair<std::string, QPFunctional>>& drifts = {}) {
    if (traj.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    const Eigen::Index n = traj.states.front().size();
    out << 't';
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
    for (const auto& [name, f] : drifts) out << ',' << name;
    out << '\n';
    std::vector<double> base;
    base.reserve(drifts.size());
    for (const auto& [name, f] : drifts) base.push_back(f.value(traj.states.front()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << detail::format_double(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::format_double(traj.states[k](i));
        for (std::size_t d = 0; d < drifts.size(); ++d)
            out << ',' << detail::format_double(drifts[d].second.value(traj.states[k]) - base[d]);
        out << '\n';
    }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const std::vector<std::pair<std::string, QPFunctional>>& drifts = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_trajectory_csv(out, traj, drifts);
}

} // namespace qpstab
