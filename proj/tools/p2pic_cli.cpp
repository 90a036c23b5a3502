#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "p2pic/p2pic.hpp"

using namespace p2pic;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTooLarge = 3;

struct RunConfig {
    ZooSpec spec;
    std::string transform = "none";
    int transform_n = 2;
    std::string dist = "natural";
    int dist_n = 1;
    std::string dist_path;
    std::vector<std::string> measures;
    std::vector<std::string> checks;
    std::size_t cap = kDefaultCap;
    double tol = kTol;
    std::string out = "out";
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("field '") + key + "': " + e.what());
    }
}

RunConfig parse_config(const json& j) {
    if (!j.is_object()) config_error("config must be a JSON object");
    static const std::set<std::string> known{"protocol", "k", "n", "flip", "transform", "transform_n", "dist", "dist_n",
                                             "dist_path", "measures", "checks", "cap", "tol", "out"};
    for (const auto& [key, v] : j.items())
        if (!known.count(key)) config_error("unknown field '" + key + "'");
    RunConfig c;
    if (!j.contains("protocol")) config_error("missing field 'protocol'");
    c.spec.name = get_or<std::string>(j, "protocol", "");
    c.spec.k = get_or<int>(j, "k", 3);
    c.spec.n = get_or<int>(j, "n", 1);
    if (j.contains("flip")) {
        try {
            c.spec.flip = j["flip"].is_string() ? parse_probability(j["flip"].get<std::string>())
                                                : parse_probability(std::to_string(j["flip"].get<double>()));
        } catch (const std::exception& e) {
            config_error(std::string("field 'flip': ") + e.what());
        }
    }
    c.transform = get_or<std::string>(j, "transform", "none");
    c.transform_n = get_or<int>(j, "transform_n", 2);
    c.dist = get_or<std::string>(j, "dist", "natural");
    c.dist_n = get_or<int>(j, "dist_n", c.spec.n);
    c.dist_path = get_or<std::string>(j, "dist_path", "");
    c.measures = get_or<std::vector<std::string>>(j, "measures", {});
    c.checks = get_or<std::vector<std::string>>(j, "checks", {});
    c.cap = static_cast<std::size_t>(get_or<double>(j, "cap", static_cast<double>(kDefaultCap)));
    c.tol = get_or<double>(j, "tol", kTol);
    c.out = get_or<std::string>(j, "out", "out");
    if (c.spec.k < 2) config_error("k must be >= 2");
    if (c.spec.n < 1 || c.dist_n < 1 || c.transform_n < 1) config_error("n must be >= 1");
    if (c.cap < 1 || c.cap > 10'000'000) config_error("cap must lie in [1, 1e7]");
    if (!(c.tol >= 0)) config_error("tol must be >= 0");
    if (std::find(zoo_names().begin(), zoo_names().end(), c.spec.name) == zoo_names().end())
        config_error("unknown protocol '" + c.spec.name + "'");
    return c;
}

// CSV with header X1..Xk,p; each X cell is a bit string, p is a fraction or decimal.
InputDistribution load_csv_dist(const std::string& path, int k) {
    std::ifstream f(path);
    if (!f) config_error("cannot read " + path);
    std::string line;
    std::getline(f, line);
    std::vector<InputDistribution::Atom> atoms;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != k + 1) config_error(path + ":" + std::to_string(lineno) + ": expected k+1 cells");
        InputPoint pt;
        for (int i = 0; i < k; ++i) {
            Value v;
            for (char ch : cells[static_cast<std::size_t>(i)]) {
                if (ch != '0' && ch != '1') config_error(path + ":" + std::to_string(lineno) + ": inputs must be bit strings");
                v.push_back(ch - '0');
            }
            pt.x.push_back(std::move(v));
        }
        Probability p;
        try {
            p = parse_probability(cells.back());
        } catch (const std::exception& e) {
            config_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (p == 0) continue;
        atoms.push_back({point_label(pt), std::move(pt), p});
    }
    try {
        return InputDistribution(std::move(atoms));
    } catch (const Error& e) {
        config_error(path + ": " + e.what());
    }
}

struct Subject {
    Protocol protocol;
    FunctionSpec function;
};

Subject build_subject(const RunConfig& c) {
    Subject s{make_zoo(c.spec), natural_function(c.spec)};
    if (c.transform == "none") return s;
    if (c.transform == "to_external") s.protocol = to_external(s.protocol);
    else if (c.transform == "to_proper_synchronous") s.protocol = to_proper_synchronous(s.protocol);
    else if (c.transform == "embed") {
        s.protocol = embed_direct_sum(s.protocol, dist_uniform(c.spec.k, 1), c.transform_n);
        s.function = fn_parity(c.spec.k, 1);
    } else if (c.transform == "reduce") {
        s.protocol = reduce_disj_to_and(s.protocol, c.transform_n);
        s.function = fn_and(c.spec.k);
    } else
        config_error("unknown transform '" + c.transform + "'");
    return s;
}

InputDistribution build_dist(const RunConfig& c, const Subject& s) {
    const int k = c.spec.k;
    if (c.dist == "natural") {
        if (c.transform == "embed") return dist_uniform(k, 1, c.cap);
        if (c.transform == "reduce") return dist_mu(k);
        return natural_dist(c.spec, c.cap);
    }
    if (c.dist == "mu") return dist_mu(k);
    if (c.dist == "mu_n") return dist_mu_n(k, c.dist_n, c.cap);
    if (c.dist == "uniform") {
        if (c.spec.name == "permutation") return dist_uniform_over(s.protocol.input_space);
        return dist_uniform(k, c.dist_n, c.cap);
    }
    if (c.dist == "csv") return load_csv_dist(c.dist_path, k);
    config_error("unknown dist '" + c.dist + "'");
}

std::vector<MeasureReport> run_measures(const RunConfig& c, const Subject& s, const InputDistribution& d) {
    std::vector<MeasureReport> out;
    if (c.measures.empty()) return out;
    JointOptions jo;
    jo.cap = c.cap;
    jo.function = &s.function;
    jo.private_rand = false;
    for (const auto& m : c.measures) jo.private_rand = jo.private_rand || m == "mic" || m == "pic";
    JointTable t = build_joint(s.protocol, d, jo);
    for (const auto& m : c.measures) {
        if (m == "mic") out.push_back(mic(t));
        else if (m == "smic") out.push_back(smic(t));
        else if (m == "pic") out.push_back(pic(t));
        else if (m == "ic_hat") out.push_back(intermediate_ics(t).ic_hat);
        else if (m == "ic_tilde") out.push_back(intermediate_ics(t).ic_tilde);
        else if (m == "randomness_cost") out.push_back(randomness_cost(t));
        else if (m == "cc") {
            MeasureReport r;
            r.measure = "cc";
            r.value = static_cast<double>(communication_cost(s.protocol));
            r.table_id = s.protocol.name;
            r.tolerance = 0;
            out.push_back(r);
        } else
            config_error("unknown measure '" + m + "'");
        out.back().tolerance = m == "cc" ? 0 : c.tol;
    }
    return out;
}

std::vector<CheckReport> run_checks(const RunConfig& c, const Subject& s, const InputDistribution& d) {
    static const std::set<std::string> known{
        "rect_deterministic", "rect_randomized", "rect_mu",          "diagonal",          "diagonal_mu",
        "localization",       "hellinger_error", "cc_vs_measures",   "smic_and_lower_bound", "mic_parity_lower_bound",
        "direct_sum_mic",     "direct_sum_smic", "smic_le_mic",      "pic_ge_half_smic",  "privacy",
        "randomness_bound",   "output_entropy_claim", "schedule_independence", "reduction_distribution", "validate"};
    for (const auto& name : c.checks)
        if (!known.count(name)) config_error("unknown check '" + name + "'");
    std::vector<CheckReport> out;
    const Protocol& p = s.protocol;
    for (const auto& name : c.checks) {
        detail::collect(out, name, p.name, [&]() -> std::vector<CheckReport> {
            if (name == "rect_deterministic") return {check_rect_deterministic(p, p.has_public_coins())};
            if (name == "rect_randomized") return {check_rect_randomized(p)};
            if (name == "rect_mu") return {check_rect_mu(p)};
            if (name == "diagonal") return {check_diagonal_all(p)};
            if (name == "diagonal_mu") return {check_diagonal_mu_all(p)};
            if (name == "localization") return {check_localization_all(p)};
            if (name == "hellinger_error") {
                auto [x, y] = separated_pair(p, s.function);
                return {check_hellinger_error(p, s.function, x, y)};
            }
            if (name == "cc_vs_measures") return check_cc_vs_measures(p, d);
            if (name == "smic_and_lower_bound") return {check_smic_and_lower_bound(p)};
            if (name == "mic_parity_lower_bound") return {check_mic_parity_lower_bound(p)};
            if (name == "direct_sum_mic") return {check_direct_sum(DirectSumKind::MIC, p, c.transform_n)};
            if (name == "direct_sum_smic") return {check_direct_sum(DirectSumKind::SMIC, p, c.transform_n)};
            if (name == "smic_le_mic") {
                JointOptions jo;
                jo.cap = c.cap;
                return {check_smic_le_mic(build_joint(p, d, jo))};
            }
            if (name == "pic_ge_half_smic") return check_pic_ge_half_smic(p, d);
            if (name == "privacy") return {check_privacy(p, s.function)};
            if (name == "randomness_bound") return {check_randomness_bound(p, s.function, d)};
            if (name == "output_entropy_claim") return {check_output_entropy_claim(p, s.function, s.function.designated.front(), d)};
            if (name == "schedule_independence") return {check_schedule_independence(p)};
            if (name == "reduction_distribution") return {check_reduction_distribution(p, c.transform_n)};
            ValidationReport v = validate_protocol(p);
            auto r = make_exact("validate", p.name, v.valid ? v.executions : 0, v.executions, "protocol well formed");
            for (const auto& x : v.violations) r.witnesses.push_back(x.kind + ": " + x.detail);
            return {r};
        });
    }
    for (auto& r : out) apply_tolerance(r, c.tol);
    return out;
}

bool too_large(const std::vector<CheckReport>& rs) {
    for (const auto& r : rs)
        if (r.relation == "raised" && r.detail.rfind(to_string(ErrorKind::SupportTooLarge), 0) == 0) return true;
    return false;
}

void print_checks(const std::vector<CheckReport>& rs) {
    for (const auto& r : rs)
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " [" << r.subject << "] lhs=" << r.lhs << " rhs=" << r.rhs
                  << " margin=" << r.margin << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
}

void write_outputs(const std::string& dir, const json& echo, const std::vector<MeasureReport>& ms,
                   const std::vector<CheckReport>& cs) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / "report.json").string(), make_report(echo, ms, cs).dump(2) + "\n");
    write_file((std::filesystem::path(dir) / "summary.csv").string(), summary_csv(cs));
}

int cmd_run(const std::string& config_path, const std::string& out_flag, double cap_flag, double tol_flag) {
    json j;
    {
        std::ifstream f(config_path);
        if (!f) config_error("cannot read " + config_path);
        try {
            j = json::parse(f);
        } catch (const json::parse_error& e) {
            config_error(std::string("malformed JSON: ") + e.what());
        }
    }
    if (cap_flag > 0) j["cap"] = cap_flag;
    if (tol_flag >= 0) j["tol"] = tol_flag;
    if (!out_flag.empty()) j["out"] = out_flag;
    RunConfig c = parse_config(j);
    if (!c.dist_path.empty() && std::filesystem::path(c.dist_path).is_relative())
        c.dist_path = (std::filesystem::path(config_path).parent_path() / c.dist_path).string();
    Subject s = build_subject(c);
    InputDistribution d = build_dist(c, s);
    std::vector<MeasureReport> ms = run_measures(c, s, d);
    std::vector<CheckReport> cs = run_checks(c, s, d);
    for (const auto& m : ms) std::cout << m.measure << " = " << m.value << "\n";
    print_checks(cs);
    write_outputs(c.out, j, ms, cs);
    if (too_large(cs)) return kExitTooLarge;
    for (const auto& r : cs)
        if (!r.pass) return kExitFail;
    return 0;
}

int cmd_suite(const std::string& profile_name, const std::string& out) {
    Profile pr = profile_by_name(profile_name);
    auto results = run_suite(pr, criteria());
    std::vector<CheckReport> all;
    bool ok = true;
    for (const auto& c : results) {
        std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.title << " (" << c.runtime_s << " s)"
                  << (c.note.empty() ? "" : " " + c.note) << "\n";
        for (const auto& r : c.checks)
            if (!r.pass) std::cout << "    failing: " << r.name << " [" << r.subject << "] " << r.detail << "\n";
        ok = ok && c.pass;
        all.insert(all.end(), c.checks.begin(), c.checks.end());
    }
    write_outputs(out, json{{"command", "suite"}, {"profile", pr.name}}, {}, all);
    if (too_large(all)) return kExitTooLarge;
    return ok ? 0 : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact information-cost analysis of peer-to-peer protocols"};
    app.require_subcommand(1);
    std::string config, out, profile = "default";
    double cap = 0, tol = -1;

    auto* run = app.add_subcommand("run", "Evaluate measures and checks for one configured protocol");
    run->add_option("--config", config, "JSON config file")->required();
    run->add_option("--out", out, "Output directory (overrides config)");
    run->add_option("--cap", cap, "Enumeration cap (at most 1e7)");
    run->add_option("--tol", tol, "Tolerance for inequality checks");

    std::string suite_out = "out";
    auto* suite = app.add_subcommand("suite", "Run the acceptance check suite");
    suite->add_option("--profile", profile, "default or full")->check(CLI::IsMember({"default", "full"}));
    suite->add_option("--out", suite_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }
    try {
        if (*run) return cmd_run(config, out, cap, tol);
        return cmd_suite(profile, suite_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::SupportTooLarge) return kExitTooLarge;
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
