#include "orbsde/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace orbsde {

using nlohmann::json;

std::string format_float17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

json json_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) <= 9.007199254740992e15)
        return json(static_cast<std::int64_t>(v));
    return json(v);
}

json json_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

json to_json(const ValidationReport& report) {
    json j;
    j["subject"] = report.subject;
    j["pass"] = report.pass();
    j["worst_margin"] = json_number(report.worst_margin);
    j["violations"] = json::array();
    for (const Violation& v : report.violations) {
        json e;
        e["what"] = v.what;
        e["margin"] = json_number(v.margin);
        if (!v.indices.empty()) e["indices"] = v.indices;
        if (!v.point.empty()) e["point"] = json_array(v.point);
        j["violations"].push_back(std::move(e));
    }
    j["notes"] = report.notes;
    return j;
}

json to_json(const SnellReport& report) {
    json j;
    j["start_time"] = report.start_time;
    j["start_mode"] = report.start_mode + 1;
    j["start_in_domain"] = report.start_in_domain;
    j["enumerated"] = report.enumerated;
    j["statistical"] = report.statistical;
    j["strategies_checked"] = report.strategies_checked;
    j["domination_margin"] = json_number(report.domination_margin);
    j["optimality_gap"] = json_number(report.optimality_gap);
    j["domination_margin_reflected"] = json_number(report.domination_margin_reflected);
    j["optimality_gap_reflected"] = json_number(report.optimality_gap_reflected);
    if (std::isfinite(report.enumeration_gap))
        j["enumeration_gap"] = json_number(report.enumeration_gap);
    return j;
}

json to_json(const SchemeSolution& solution) {
    json j;
    j["y0"] = json_array(solution.y0());
    j["ytilde0"] = json_array(solution.ytilde0());
    json z0 = json::array();
    const std::vector<double> z = solution.z0();
    for (int jc = 0; jc < solution.d; ++jc) {
        std::vector<double> row(z.begin() + static_cast<std::size_t>(jc) * solution.q,
                                z.begin() + static_cast<std::size_t>(jc + 1) * solution.q);
        z0.push_back(json_array(row));
    }
    j["z0"] = std::move(z0);
    j["grid"]["n"] = solution.grid.n_steps();
    j["grid"]["kappa"] = solution.grid.reflection_count();
    j["grid"]["h"] = json_number(solution.grid.modulus());
    j["grid"]["hR"] = json_number(solution.grid.reflection_modulus());
    json diag;
    diag["max_picard"] = solution.diagnostics.max_picard;
    diag["picard_iterations"] = solution.diagnostics.picard_iterations;
    diag["warnings"] = solution.diagnostics.warnings;
    long active = 0;
    for (const StepAggregates& a : solution.aggregates) active += a.projection_active;
    diag["projection_active_total"] = active;
    j["diagnostics"] = std::move(diag);
    return j;
}

json to_json(const ConvergenceTable& table) {
    json j;
    j["reference"] = table.reference;
    j["reference_y0"] = json_array(table.reference_y0);
    j["slope"] = json_number(table.slope);
    j["intercept"] = json_number(table.intercept);
    j["fit_points"] = table.fit_points;
    j["rows"] = json::array();
    for (const ConvergenceRow& r : table.rows) {
        json e;
        e["n"] = r.n;
        e["h"] = json_number(r.h);
        e["hR"] = json_number(r.hR);
        e["kappa"] = r.kappa;
        e["y0"] = json_array(r.y0);
        e["error"] = json_number(r.error);
        e["stderr"] = json_number(r.stderr_val);
        e["alpha"] = json_number(r.alpha);
        e["seconds"] = json_number(r.seconds);
        if (std::isfinite(r.z_aggregate)) e["z_aggregate"] = json_number(r.z_aggregate);
        if (r.failed) e["message"] = r.message;
        j["rows"].push_back(std::move(e));
    }
    return j;
}

json to_json(const std::vector<RefinementRow>& rows) {
    json j = json::array();
    for (const RefinementRow& r : rows) {
        json e;
        e["intervals"] = r.intervals;
        e["hR"] = json_number(r.hR);
        e["alpha"] = json_number(r.alpha);
        e["y0"] = json_array(r.y0);
        e["drift"] = json_number(r.drift);
        j.push_back(std::move(e));
    }
    return j;
}

json to_json(const std::vector<PerturbationRow>& rows) {
    json j = json::array();
    for (const PerturbationRow& r : rows) {
        json e;
        e["zeta"] = json_number(r.zeta);
        e["y0"] = json_array(r.y0);
        e["delta"] = json_number(r.delta);
        j.push_back(std::move(e));
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export: cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

std::string csv_of(const ConvergenceTable& table) {
    std::ostringstream os;
    const int d = table.reference_y0.empty()
                      ? (table.rows.empty() ? 0 : static_cast<int>(table.rows[0].y0.size()))
                      : static_cast<int>(table.reference_y0.size());
    bool with_z = false;
    for (const ConvergenceRow& r : table.rows) with_z |= std::isfinite(r.z_aggregate);
    os << "n,h,hR,kappa";
    for (int c = 1; c <= d; ++c) os << ",y0_" << c;
    os << ",error,stderr,alpha,seconds";
    if (with_z) os << ",z_aggregate";
    os << "\n";
    for (const ConvergenceRow& r : table.rows) {
        os << r.n << ',' << format_float17(r.h) << ',' << format_float17(r.hR) << ',' << r.kappa;
        for (int c = 0; c < d; ++c)
            os << ',' << (c < static_cast<int>(r.y0.size()) ? format_float17(r.y0[c]) : "nan");
        os << ',' << format_float17(r.error) << ',' << format_float17(r.stderr_val) << ','
           << format_float17(r.alpha) << ',' << format_float17(r.seconds);
        if (with_z) os << ',' << format_float17(r.z_aggregate);
        os << "\n";
    }
    return os.str();
}

std::string csv_of(const SchemeSolution& solution) {
    std::ostringstream os;
    const int d = solution.d;
    os << "i,t,reflection";
    for (int c = 1; c <= d; ++c) os << ",y_mean_" << c;
    for (int c = 1; c <= d; ++c) os << ",y_se_" << c;
    os << ",max_dk,projection_active\n";
    for (std::size_t i = 0; i < solution.aggregates.size(); ++i) {
        const StepAggregates& a = solution.aggregates[i];
        os << i << ',' << format_float17(solution.grid.times[i]) << ','
           << (solution.grid.is_reflection(static_cast<int>(i)) ? 1 : 0);
        for (int c = 0; c < d; ++c) os << ',' << format_float17(a.y_mean[c]);
        for (int c = 0; c < d; ++c) os << ',' << format_float17(a.y_se[c]);
        os << ',' << format_float17(a.max_dk) << ',' << a.projection_active << "\n";
    }
    return os.str();
}

std::string csv_of(const std::vector<RefinementRow>& rows) {
    std::ostringstream os;
    const int d = rows.empty() ? 0 : static_cast<int>(rows[0].y0.size());
    os << "intervals,hR,alpha";
    for (int c = 1; c <= d; ++c) os << ",y0_" << c;
    os << ",drift\n";
    for (const RefinementRow& r : rows) {
        os << r.intervals << ',' << format_float17(r.hR) << ',' << format_float17(r.alpha);
        for (double v : r.y0) os << ',' << format_float17(v);
        os << ',' << format_float17(r.drift) << "\n";
    }
    return os.str();
}

std::string csv_of(const std::vector<PerturbationRow>& rows) {
    std::ostringstream os;
    const int d = rows.empty() ? 0 : static_cast<int>(rows[0].y0.size());
    os << "zeta";
    for (int c = 1; c <= d; ++c) os << ",y0_" << c;
    os << ",delta\n";
    for (const PerturbationRow& r : rows) {
        os << format_float17(r.zeta);
        for (double v : r.y0) os << ',' << format_float17(v);
        os << ',' << format_float17(r.delta) << "\n";
    }
    return os.str();
}

std::string csv_of(const Strategy& strategy) {
    std::ostringstream os;
    os << "time,node,mode,decision\n";
    const int d = strategy.d;
    for (const auto& [time, table] : strategy.decisions) {
        const long slots = static_cast<long>(table.size()) / d;
        for (long node = 0; node < slots; ++node)
            for (int mode = 0; mode < d; ++mode)
                os << time << ',' << node << ',' << mode + 1 << ','
                   << table[static_cast<std::size_t>(node) * d + mode] + 1 << "\n";
    }
    return os.str();
}

SolutionSummary read_solution_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import: cannot open " + path);
    json j = json::parse(in);
    SolutionSummary s;
    for (const auto& v : j.at("y0")) s.y0.push_back(v.get<double>());
    for (const auto& v : j.at("ytilde0")) s.ytilde0.push_back(v.get<double>());
    for (const auto& row : j.at("z0"))
        for (const auto& v : row) s.z0.push_back(v.get<double>());
    return s;
}

}  // namespace orbsde
