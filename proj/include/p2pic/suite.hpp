#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "async_demo.hpp"
#include "checks.hpp"

namespace p2pic {

// ---------------------------------------------------------------------------------------------
// Zoo registry: protocols by name, each with the distribution and function it is usually read with.

struct ZooSpec {
    std::string name;
    int k = 3;
    int n = 1;
    Probability flip = Probability(1, 8);
};

inline const std::vector<std::string>& zoo_names() {
    static const std::vector<std::string> names{"star_parity", "star_and", "star_disj", "permutation", "ring_private_parity",
                                                "noisy_star_parity", "padded_star_and", "silent"};
    return names;
}

inline Protocol make_zoo(const ZooSpec& s) {
    if (s.k < 2) throw Error(ErrorKind::ConfigError, "k must be >= 2");
    if (s.n < 1) throw Error(ErrorKind::ConfigError, "n must be >= 1");
    if (s.name == "star_parity") return make_star_parity(s.k, s.n);
    if (s.name == "star_and") return make_star_and(s.k);
    if (s.name == "star_disj") return make_star_disj(s.k, s.n);
    if (s.name == "permutation") return make_permutation(s.k);
    if (s.name == "ring_private_parity") return make_ring_private_parity(s.k);
    if (s.name == "noisy_star_parity") return make_noisy_star_parity(s.k, s.flip);
    if (s.name == "padded_star_and") return make_padded_star_and(s.k);
    if (s.name == "silent") return make_silent(s.k, s.n);
    throw Error(ErrorKind::ConfigError, "unknown protocol '" + s.name + "'");
}

inline FunctionSpec natural_function(const ZooSpec& s) {
    if (s.name == "star_parity" || s.name == "noisy_star_parity") return fn_parity(s.k, s.name == "star_parity" ? s.n : 1);
    if (s.name == "ring_private_parity") return fn_parity(s.k, 1);
    if (s.name == "star_and" || s.name == "padded_star_and") return fn_and(s.k);
    if (s.name == "star_disj") return fn_disj(s.k, s.n);
    if (s.name == "permutation") return fn_permutation(s.k);
    if (s.name == "silent") return fn_constant(s.k, Value{0});
    throw Error(ErrorKind::ConfigError, "unknown protocol '" + s.name + "'");
}

inline InputDistribution natural_dist(const ZooSpec& s, std::size_t cap = kDefaultCap) {
    if (s.name == "star_and" || s.name == "padded_star_and") return dist_mu(s.k);
    if (s.name == "star_disj") return s.n == 1 ? dist_mu(s.k) : dist_mu_n(s.k, s.n, cap);
    if (s.name == "permutation") return dist_uniform_over(make_permutation(s.k).input_space);
    const int n = (s.name == "star_parity" || s.name == "silent") ? s.n : 1;
    return dist_uniform(s.k, n, cap);
}

inline std::vector<ZooSpec> zoo_catalog(int kmax, int nmax) {
    std::vector<ZooSpec> out;
    for (int k = 3; k <= kmax; ++k) {
        for (int n = 1; n <= nmax; ++n) {
            out.push_back({"star_parity", k, n});
            out.push_back({"star_disj", k, n});
            out.push_back({"silent", k, n});
        }
        out.push_back({"star_and", k});
        out.push_back({"permutation", k});
        out.push_back({"ring_private_parity", k});
        out.push_back({"noisy_star_parity", k});
        out.push_back({"padded_star_and", k});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Aggregate checks over all admissible index choices; the reported instance is the one with least margin.

inline CheckReport worst_of(std::string name, std::string subject, std::vector<CheckReport> rs) {
    if (rs.empty()) {
        CheckReport r = make_exact(std::move(name), std::move(subject), 0, 0, "no instances");
        return r;
    }
    std::size_t w = 0;
    bool all = true;
    double ms = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        all = all && rs[i].pass;
        ms += rs[i].runtime_ms;
        if ((!rs[i].pass && rs[w].pass) || (rs[i].pass == rs[w].pass && rs[i].margin < rs[w].margin)) w = i;
    }
    CheckReport out = rs[w];
    out.name = std::move(name);
    out.subject = std::move(subject);
    out.pass = all;
    out.runtime_ms = ms;
    out.detail = std::to_string(rs.size()) + " instances; least margin at " + rs[w].detail;
    return out;
}

inline CheckReport check_diagonal_all(const Protocol& p) {
    std::vector<CheckReport> rs;
    for (const auto& x : p.input_space)
        for (const auto& y : p.input_space)
            for (int i = 0; i < p.k; ++i)
                if (x != y) rs.push_back(check_diagonal(p, x, y, i));
    return worst_of("diagonal", p.name, std::move(rs));
}

inline CheckReport check_localization_all(const Protocol& p) {
    std::vector<CheckReport> rs;
    for (int i = 0; i < p.k; ++i)
        for (int j = 0; j < p.k; ++j)
            if (i != j) rs.push_back(check_localization(p, i, j));
    for (auto& r : rs) r.margin = -std::fabs(r.margin);
    return worst_of("localization", p.name, std::move(rs));
}

inline CheckReport check_diagonal_mu_all(const Protocol& p) {
    JointTable t = build_joint(p, dist_mu(p.k), [] {
        JointOptions o;
        o.private_rand = false;
        return o;
    }());
    std::vector<CheckReport> rs;
    for (int i = 0; i < p.k; ++i)
        for (int j = 0; j < p.k; ++j)
            if (i != j) rs.push_back(check_diagonal_mu(p, t, i, j));
    return worst_of("diagonal_mu", p.name, std::move(rs));
}

// First pair of inputs with different function values, for the Hellinger-error check.
inline std::pair<InputTuple, InputTuple> separated_pair(const Protocol& p, const FunctionSpec& f) {
    for (const auto& x : p.input_space)
        for (const auto& y : p.input_space)
            if (f.value(x) != f.value(y)) return {x, y};
    throw Error(ErrorKind::SameFunctionValue, "function is constant on the input space");
}

// Random pairs of small distributions over a shared support; weights are small integers so values are exact.
inline std::vector<CheckReport> fuzz_hellinger_toolkit(int count, std::uint64_t seed = 7) {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size_d(2, 6), w_d(0, 12);
    std::vector<CheckReport> dist_rs, mi_rs;
    for (int c = 0; c < count; ++c) {
        const int m = size_d(rng);
        auto draw = [&] {
            std::vector<int> w(static_cast<std::size_t>(m));
            int total = 0;
            while (total == 0) {
                total = 0;
                for (auto& v : w) total += (v = w_d(rng));
            }
            std::vector<FiniteDistribution<std::string>::Atom> atoms;
            for (int a = 0; a < m; ++a)
                if (w[static_cast<std::size_t>(a)] > 0)
                    atoms.push_back({"y" + std::to_string(a), "y" + std::to_string(a), Probability(w[static_cast<std::size_t>(a)], total)});
            return FiniteDistribution<std::string>(std::move(atoms));
        };
        auto p = draw(), q = draw();
        const std::string tag = "case " + std::to_string(c);
        auto a = make_ineq("hellinger_ge_delta", "fuzz", hellinger(p, q), stat_distance(p, q) / std::sqrt(2.0L), "h >= Delta/sqrt2");
        a.detail = tag;
        dist_rs.push_back(a);
        auto b = make_ineq("mi_ge_hellinger_sq", "fuzz", switch_mutual_info(p, q), hellinger_sq(p, q), "I(S;Y) >= h^2");
        b.detail = tag;
        mi_rs.push_back(b);
    }
    auto r1 = worst_of("hellinger_ge_delta", "fuzz", std::move(dist_rs));
    auto r2 = worst_of("mi_ge_hellinger_sq", "fuzz", std::move(mi_rs));
    r1.runtime_ms = r2.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {r1, r2};
}

// ---------------------------------------------------------------------------------------------
// Acceptance criteria.

struct Profile {
    std::string name = "default";
    int kmax = 4; // sweep bound; criteria that name larger k keep them
    int nmax = 2;
};

inline Profile profile_by_name(const std::string& name) {
    if (name == "default") return {"default", 4, 2};
    if (name == "full") return {"full", 5, 2};
    throw Error(ErrorKind::ConfigError, "unknown profile '" + name + "'");
}

struct CriterionResult {
    int id = 0;
    std::string title;
    double budget_s = 0;
    double runtime_s = 0;
    std::vector<CheckReport> checks;
    bool pass = false;
    std::string note;
};

namespace detail {

// Runs one check producer; an Error becomes a failed report carrying its message.
template <class F>
void collect(std::vector<CheckReport>& out, const std::string& name, const std::string& subject, F&& f) {
    try {
        using R = decltype(f());
        if constexpr (std::is_same_v<R, CheckReport>) out.push_back(f());
        else
            for (auto& r : f()) out.push_back(std::move(r));
    } catch (const std::exception& e) {
        CheckReport r;
        r.name = name;
        r.subject = subject;
        r.relation = "raised";
        r.rule = "exact";
        r.detail = e.what();
        r.pass = false;
        r.margin = -1;
        out.push_back(std::move(r));
    }
}

template <class F>
CriterionResult run_criterion(int id, std::string title, double budget_s, F&& body) {
    CriterionResult c;
    c.id = id;
    c.title = std::move(title);
    c.budget_s = budget_s;
    auto t0 = std::chrono::steady_clock::now();
    body(c.checks);
    c.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.pass = !c.checks.empty() && c.runtime_s < budget_s;
    for (const auto& r : c.checks) c.pass = c.pass && r.pass;
    if (c.runtime_s >= budget_s) c.note = "over runtime budget";
    return c;
}

inline JointOptions public_only() {
    JointOptions o;
    o.private_rand = false;
    return o;
}

} // namespace detail

inline CriterionResult criterion_schedule_independence(const Profile& pr) {
    return detail::run_criterion(1, "schedule independence", 10, [&](std::vector<CheckReport>& out) {
        for (const auto& s : zoo_catalog(std::max(pr.kmax, 5), 2)) {
            Protocol p = make_zoo(s);
            detail::collect(out, "schedule_independence", p.name, [&] { return check_schedule_independence(p, 100); });
        }
    });
}

inline CriterionResult criterion_rectangularity(const Profile& pr) {
    return detail::run_criterion(2, "rectangularity", 30, [&](std::vector<CheckReport>& out) {
        std::vector<Protocol> ps{make_star_and(3), make_star_parity(3, 1), make_ring_private_parity(3)};
        if (pr.kmax >= 5) {
            ps.push_back(make_star_and(4));
            ps.push_back(make_ring_private_parity(4));
        }
        for (const auto& p : ps) {
            detail::collect(out, "rect_deterministic", p.name, [&] { return check_rect_deterministic(p); });
            detail::collect(out, "rect_randomized", p.name, [&] { return check_rect_randomized(p); });
        }
        for (int k = 4; k <= (pr.kmax >= 5 ? 5 : 4); ++k) {
            Protocol p = make_star_and(k);
            detail::collect(out, "rect_mu", p.name, [&] { return check_rect_mu(p); });
        }
    });
}

inline CriterionResult criterion_entropy_cc(const Profile& pr) {
    return detail::run_criterion(3, "entropy and communication", 30, [&](std::vector<CheckReport>& out) {
        for (const auto& s : zoo_catalog(pr.kmax, pr.nmax)) {
            Protocol p = make_zoo(s);
            detail::collect(out, "cc_vs_measures", p.name, [&] { return check_cc_vs_measures(p, natural_dist(s)); });
        }
    });
}

inline CriterionResult criterion_mic(const Profile&, const std::function<long double()>& oracle = {}) {
    return detail::run_criterion(4, "MIC oracle and parity bound", 20, [&](std::vector<CheckReport>& out) {
        detail::collect(out, "mic_oracle", "star_parity(3,1)", [&] {
            auto t0 = std::chrono::steady_clock::now();
            const long double v = mic(build_joint(make_star_parity(3, 1), dist_uniform(3, 1))).value;
            const long double ref = oracle ? oracle() : 4.0L;
            auto r = make_eq("mic_oracle", "star_parity(3,1)", v, ref, "mic == brute-force oracle");
            r.detail = oracle ? "independent oracle" : "reference value 4";
            r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            return r;
        });
        for (int k = 3; k <= 5; ++k) {
            Protocol p = make_star_parity(k, 1);
            detail::collect(out, "mic_parity_lower_bound", p.name, [&] { return check_mic_parity_lower_bound(p); });
        }
    });
}

inline CriterionResult criterion_smic_and(const Profile&) {
    return detail::run_criterion(5, "SMIC(AND) bound", 30, [&](std::vector<CheckReport>& out) {
        for (int k = 4; k <= 5; ++k) {
            Protocol p = make_star_and(k);
            detail::collect(out, "smic_and_lower_bound", p.name, [&] { return check_smic_and_lower_bound(p); });
        }
    });
}

inline CriterionResult criterion_reduction(const Profile&) {
    return detail::run_criterion(6, "reduction correctness", 60, [&](std::vector<CheckReport>& out) {
        const int k = 4, n = 2;
        Protocol pi = make_star_disj(k, n);
        Protocol red;
        detail::collect(out, "reduce_disj_to_and", pi.name, [&] {
            red = reduce_disj_to_and(pi, n);
            return make_exact("reduce_disj_to_and", pi.name, 1, 1, "reduction constructed");
        });
        if (red.programs.empty()) return;
        detail::collect(out, "reduction_distribution", red.name, [&] { return check_reduction_distribution(red, n); });
        detail::collect(out, "reduction_zero_error", red.name, [&] {
            auto t0 = std::chrono::steady_clock::now();
            ErrorRate e = error_rate(red, fn_and(k), red.input_space);
            auto r = make_exact("reduction_zero_error", red.name, e.eps == 0 ? 1 : 0, 1, "error of pi' on every input = 0");
            r.detail = "eps=" + to_string(e.eps) + " over " + std::to_string(red.input_space.size()) + " inputs";
            r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            return r;
        });
        detail::collect(out, "direct_sum_smic", pi.name, [&] { return check_direct_sum(DirectSumKind::SMIC, pi, n); });
    });
}

inline CriterionResult criterion_direct_sum_mic(const Profile&) {
    return detail::run_criterion(7, "direct sum (MIC)", 30, [&](std::vector<CheckReport>& out) {
        Protocol pi = make_star_parity(3, 2);
        detail::collect(out, "direct_sum_mic", pi.name, [&] { return check_direct_sum(DirectSumKind::MIC, pi, 2); });
    });
}

inline CriterionResult criterion_smic_le_mic(const Profile&) {
    return detail::run_criterion(8, "SMIC <= MIC", 30, [&](std::vector<CheckReport>& out) {
        for (int n = 1; n <= 2; ++n) {
            Protocol p = make_star_disj(4, n);
            detail::collect(out, "smic_le_mic", p.name, [&] {
                JointTable t = build_joint(p, n == 1 ? dist_mu(4) : dist_mu_n(4, n));
                return check_smic_le_mic(t);
            });
        }
    });
}

inline CriterionResult criterion_pic_chain(const Profile& pr) {
    return detail::run_criterion(9, "PIC chain", 60, [&](std::vector<CheckReport>& out) {
        std::vector<std::pair<Protocol, InputDistribution>> cases;
        cases.emplace_back(make_star_and(4), dist_mu(4));
        cases.emplace_back(make_star_disj(4, 2), dist_mu_n(4, 2));
        if (pr.kmax >= 5) cases.emplace_back(make_star_and(5), dist_mu(5));
        for (const auto& [pi, d] : cases) {
            detail::collect(out, "pic_ge_half_smic", pi.name, [&, &pi = pi, &d = d] {
                return check_pic_ge_half_smic(to_proper_synchronous(pi), d);
            });
        }
    });
}

inline CriterionResult criterion_privacy(const Profile& pr) {
    return detail::run_criterion(10, "privacy and randomness", 30, [&](std::vector<CheckReport>& out) {
        for (int k = 3; k <= std::max(4, pr.kmax); ++k) {
            Protocol p = make_ring_private_parity(k);
            const FunctionSpec f = fn_parity(k, 1);
            const InputDistribution u = dist_uniform(k, 1);
            detail::collect(out, "privacy", p.name, [&] { return check_privacy(p, f); });
            detail::collect(out, "randomness_cost", p.name, [&] {
                auto t0 = std::chrono::steady_clock::now();
                auto r = make_eq("randomness_cost", p.name, randomness_cost(build_joint(p, u)).value, 1.0L, "H(Pi | X R^p) == 1");
                r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                return r;
            });
            detail::collect(out, "randomness_bound", p.name, [&] { return check_randomness_bound(p, f, u); });
        }
        Protocol sp = make_star_parity(3, 1);
        detail::collect(out, "not_private", sp.name, [&] {
            CheckReport inner = check_privacy(sp, fn_parity(3, 1));
            auto r = make_exact("not_private", sp.name, !inner.pass && !inner.witnesses.empty() ? 1 : 0, 1,
                                "privacy fails with a witness pair");
            r.witnesses = inner.witnesses;
            r.detail = std::to_string(inner.rhs - inner.lhs) + " of " + std::to_string(inner.rhs) + " comparisons differ";
            r.runtime_ms = inner.runtime_ms;
            return r;
        });
    });
}

inline CriterionResult criterion_hellinger(const Profile&) {
    return detail::run_criterion(11, "Hellinger toolkit", 10, [&](std::vector<CheckReport>& out) {
        detail::collect(out, "hellinger_fuzz", "fuzz", [&] { return fuzz_hellinger_toolkit(1000); });
        Protocol p = make_star_and(3);
        detail::collect(out, "hellinger_error", p.name, [&] {
            CheckReport r = check_hellinger_error(p, fn_and(3), {{1}, {1}, {1}}, {{0}, {1}, {1}});
            r.pass = r.pass && std::fabs(r.lhs - 1.0) <= kTol;
            return r;
        });
    });
}

inline CriterionResult criterion_async_demo(const Profile&) {
    return detail::run_criterion(12, "general asynchronous leak", 1, [&](std::vector<CheckReport>& out) {
        detail::collect(out, "async_leak", "example", [&] {
            auto t0 = std::chrono::steady_clock::now();
            AsyncLeakDemo d = demo_general_async_leak();
            auto r = make_exact("async_leak", "general async", (d.transcripts_identical ? 1 : 0) + (d.orders_differ ? 1 : 0), 2,
                                "link transcripts equal, arrival order at B differs");
            const char* names = "ABCD";
            auto order = [&](const AsyncLeakRun& run) {
                std::string s;
                for (int v : run.arrival_order_at_b) s += names[v];
                return s;
            };
            r.detail = "arrivals at B: x=0 -> " + order(d.run0) + ", x=1 -> " + order(d.run1) +
                       "; bits " + std::to_string(d.run0.total_bits);
            r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            return r;
        });
    });
}

using CriterionFn = std::function<CriterionResult(const Profile&)>;

inline std::vector<CriterionFn> criteria(const std::function<long double()>& mic_oracle = {}) {
    return {criterion_schedule_independence,
            criterion_rectangularity,
            criterion_entropy_cc,
            [mic_oracle](const Profile& p) { return criterion_mic(p, mic_oracle); },
            criterion_smic_and,
            criterion_reduction,
            criterion_direct_sum_mic,
            criterion_smic_le_mic,
            criterion_pic_chain,
            criterion_privacy,
            criterion_hellinger,
            criterion_async_demo};
}

// Results come back in criterion order whatever the thread count.
inline std::vector<CriterionResult> run_suite(const Profile& pr, const std::vector<CriterionFn>& fns) {
    std::vector<CriterionResult> out(fns.size());
    const int threads = std::min<int>(thread_count(), static_cast<int>(fns.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < fns.size(); ++i) out[i] = fns[i](pr);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < fns.size(); i = next++) out[i] = fns[i](pr);
        });
    for (auto& th : pool) th.join();
    return out;
}

} // namespace p2pic
