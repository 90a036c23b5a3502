#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "checks.hpp"
#include "measures.hpp"

namespace p2pic {

inline constexpr const char* kReportVersion = "1";

// Values are rounded to 12 significant digits so reports compare byte-for-byte across runs.
inline double stable(double v) {
    if (v == 0 || !std::isfinite(v)) return v == 0 ? 0.0 : v;
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return std::stod(os.str());
}

inline nlohmann::json to_json(const MeasureReport& m) {
    nlohmann::json b = nlohmann::json::array();
    for (long double v : m.breakdown) b.push_back(stable(static_cast<double>(v)));
    return {{"measure", m.measure}, {"value", stable(static_cast<double>(m.value))}, {"breakdown", b},
            {"table_id", m.table_id}, {"tolerance", m.tolerance}};
}

// runtime_ms is left out: it is the one nondeterministic field.
inline nlohmann::json to_json(const CheckReport& r) {
    return {{"name", r.name},         {"subject", r.subject},     {"lhs", stable(r.lhs)},
            {"rhs", stable(r.rhs)},   {"margin", stable(r.margin)}, {"pass", r.pass},
            {"relation", r.relation}, {"rule", r.rule},         {"detail", r.detail},       {"witnesses", r.witnesses}};
}

inline nlohmann::json make_report(const nlohmann::json& config_echo, const std::vector<MeasureReport>& measures,
                                  const std::vector<CheckReport>& checks) {
    nlohmann::json ms = nlohmann::json::array(), cs = nlohmann::json::array();
    for (const auto& m : measures) ms.push_back(to_json(m));
    for (const auto& c : checks) cs.push_back(to_json(c));
    return {{"version", kReportVersion}, {"config_echo", config_echo}, {"measures", ms}, {"checks", cs}};
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string summary_csv(const std::vector<CheckReport>& checks) {
    std::ostringstream os;
    os << "check,protocol,LHS,RHS,margin,pass\n";
    os << std::setprecision(12);
    for (const auto& c : checks)
        os << csv_field(c.name) << "," << csv_field(c.subject) << "," << stable(c.lhs) << "," << stable(c.rhs) << ","
           << stable(c.margin) << "," << (c.pass ? "true" : "false") << "\n";
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + path);
    f << content;
}

} // namespace p2pic
