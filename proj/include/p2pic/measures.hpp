#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "executor.hpp"
#include "info.hpp"
#include "joint_table.hpp"

namespace p2pic {

struct MeasureReport {
    std::string measure;
    double value = 0;
    std::vector<double> breakdown; // per player
    std::string table_id;
    double tolerance = kTol;
};

inline int table_k(const JointTable& t) {
    int k = 0;
    while (t.has(col_x(k))) ++k;
    if (k < 2) throw Error(ErrorKind::MissingColumns, "table '" + t.id() + "' has no player input columns");
    return k;
}

inline MeasureReport finish_report(std::string name, const JointTable& t, std::vector<long double> parts) {
    MeasureReport r;
    r.measure = std::move(name);
    r.table_id = t.id();
    long double total = 0;
    for (auto v : parts) {
        total += v;
        r.breakdown.push_back(static_cast<double>(v));
    }
    r.value = static_cast<double>(total);
    return r;
}

// sum_i I(X_{-i}; Pi_i | X_i R_i Rp) + I(X_i; Pi_i | X_{-i} R_{-i} Rp)
inline MeasureReport mic(const JointTable& t) {
    const int k = table_k(t);
    t.require(cols_r(k) + std::vector<std::string>{"Rp"});
    std::vector<long double> parts;
    for (int i = 0; i < k; ++i) {
        const std::vector<std::string> pi{col_pi(i)};
        long double learn = cond_mutual_info(t, cols_x(k, i), pi, {col_x(i), col_r(i), "Rp"});
        long double leak = cond_mutual_info(t, {col_x(i)}, pi, cols_x(k, i) + cols_r(k, i) + std::vector<std::string>{"Rp"});
        parts.push_back(learn + leak);
    }
    return finish_report("MIC", t, parts);
}

// sum_i I(X_i; Pi_i | M Z Rp) + I(M; Pi_i | X_i Z Rp)
inline MeasureReport smic(const JointTable& t) {
    const int k = table_k(t);
    t.require({"M", "Z", "Rp"});
    std::vector<long double> parts;
    for (int i = 0; i < k; ++i) {
        const std::vector<std::string> pi{col_pi(i)};
        parts.push_back(cond_mutual_info(t, {col_x(i)}, pi, {"M", "Z", "Rp"}) +
                        cond_mutual_info(t, {"M"}, pi, {col_x(i), "Z", "Rp"}));
    }
    return finish_report("SMIC", t, parts);
}

// sum_i I(X_{-i}; Pi_i R_{-i} | X_i R_i Rp)
inline MeasureReport pic(const JointTable& t) {
    const int k = table_k(t);
    t.require(cols_r(k) + std::vector<std::string>{"Rp"});
    std::vector<long double> parts;
    for (int i = 0; i < k; ++i)
        parts.push_back(cond_mutual_info(t, cols_x(k, i), std::vector<std::string>{col_pi(i)} + cols_r(k, i),
                                         {col_x(i), col_r(i), "Rp"}));
    return finish_report("PIC", t, parts);
}

struct IntermediateICs {
    MeasureReport ic_hat;   // sum_j I(X_{-j}; incoming Pi_j | X_j Rp M Z)
    MeasureReport ic_tilde; // sum_i I(X_{-i}; Pi_i | X_i Rp Z)
};

inline IntermediateICs intermediate_ics(const JointTable& t) {
    const int k = table_k(t);
    t.require({"M", "Z", "Rp"});
    std::vector<long double> hat, tilde;
    for (int i = 0; i < k; ++i) {
        hat.push_back(cond_mutual_info(t, cols_x(k, i), {col_in(i)}, {col_x(i), "Rp", "M", "Z"}));
        tilde.push_back(cond_mutual_info(t, cols_x(k, i), {col_pi(i)}, {col_x(i), "Rp", "Z"}));
    }
    return {finish_report("IC_hat", t, hat), finish_report("IC_tilde", t, tilde)};
}

// H(Pi | X Rp)
inline MeasureReport randomness_cost(const JointTable& t) {
    const int k = table_k(t);
    t.require({"Pi", "Rp"});
    return finish_report("randomness_cost", t, {cond_entropy(t, {"Pi"}, cols_x(k) + std::vector<std::string>{"Rp"})});
}

// Distribution of Pi (player < 0) or Pi_player for a fixed input, over all randomness.
inline FiniteDistribution<std::string> transcript_dist(const Protocol& p, const InputTuple& x, int player = -1) {
    std::map<std::string, Probability> mass;
    std::vector<std::string> order;
    for_each_path(p, x, [&](const RandomAssignment&, const Probability& pr, const ExecutionResult& r) {
        std::string key = player < 0 ? r.transcript.key() : r.transcript.player_key(player);
        auto [it, fresh] = mass.emplace(key, 0);
        if (fresh) order.push_back(key);
        it->second += pr;
    });
    std::vector<FiniteDistribution<std::string>::Atom> atoms;
    for (const auto& key : order) atoms.push_back({key, key, mass[key]});
    return FiniteDistribution<std::string>(std::move(atoms));
}

inline std::vector<Value> split_instances(const Value& v, int n) {
    if (n <= 1) return {v};
    if (v.size() % static_cast<std::size_t>(n) != 0) return {v};
    std::vector<Value> out;
    const std::size_t w = v.size() / static_cast<std::size_t>(n);
    for (int l = 0; l < n; ++l)
        out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(l * w), v.begin() + static_cast<std::ptrdiff_t>((l + 1) * w));
    return out;
}

struct ErrorRate {
    Probability eps = 0;
    std::vector<Probability> per_player;
    InputTuple worst_input;
};

// Worst case over the given inputs of the probability that some designated player errs.
// For f with several instances, each instance is judged on its own and the worst instance counts.
inline ErrorRate error_rate(const Protocol& p, const FunctionSpec& f, const std::vector<InputTuple>& xs) {
    ErrorRate er;
    er.per_player.assign(static_cast<std::size_t>(p.k), 0);
    const int n = std::max(1, f.instances);
    for (const auto& x : xs) {
        std::vector<Probability> any_wrong(static_cast<std::size_t>(n), 0);
        std::vector<Probability> player_wrong(static_cast<std::size_t>(p.k), 0);
        for_each_path(p, x, [&](const RandomAssignment&, const Probability& pr, const ExecutionResult& r) {
            std::vector<bool> inst_wrong(static_cast<std::size_t>(n), false);
            for (int i : f.designated) {
                const auto& out = r.outputs[static_cast<std::size_t>(i)];
                Value want = f.f(i, x);
                auto want_parts = split_instances(want, n);
                bool wrong_any = false;
                if (!out || out->size() != want.size()) {
                    std::fill(inst_wrong.begin(), inst_wrong.end(), true);
                    wrong_any = true;
                } else {
                    auto got_parts = split_instances(*out, n);
                    for (std::size_t l = 0; l < want_parts.size(); ++l)
                        if (got_parts[l] != want_parts[l]) {
                            inst_wrong[l] = true;
                            wrong_any = true;
                        }
                }
                if (wrong_any) player_wrong[static_cast<std::size_t>(i)] += pr;
            }
            for (int l = 0; l < n; ++l)
                if (inst_wrong[static_cast<std::size_t>(l)]) any_wrong[static_cast<std::size_t>(l)] += pr;
        });
        const Probability ex = *std::max_element(any_wrong.begin(), any_wrong.end());
        if (er.worst_input.empty() || ex > er.eps) {
            er.eps = ex;
            er.worst_input = x;
        }
        for (int i = 0; i < p.k; ++i)
            er.per_player[static_cast<std::size_t>(i)] = std::max(er.per_player[static_cast<std::size_t>(i)], player_wrong[static_cast<std::size_t>(i)]);
    }
    return er;
}

inline ErrorRate error_rate(const Protocol& p, const FunctionSpec& f, const InputDistribution& d) {
    std::vector<InputTuple> xs;
    for (const auto& a : d.atoms()) xs.push_back(a.value.x);
    return error_rate(p, f, xs);
}

struct Decoder {
    std::map<std::string, Value> theta; // full transcript key -> output
    Probability eps = 0;
    bool is_optimal = false;
    std::size_t transcripts = 0;

    Value operator()(const std::string& key) const {
        auto it = theta.find(key);
        if (it == theta.end()) throw Error(ErrorKind::InvalidArgument, "transcript outside decoder domain");
        return it->second;
    }
};

// Decoder of the full transcript minimizing the worst-case error over xs. Exhaustive when outputs
// are binary and at most 20 transcripts are reachable; otherwise maximum likelihood (an upper bound
// on the optimum, exact whenever it reaches 0).
inline Decoder best_external_decoder(const Protocol& p, const FunctionSpec& f, const std::vector<InputTuple>& xs,
                                     std::size_t exhaustive_limit = 20) {
    std::vector<std::string> keys;
    std::map<std::string, std::size_t> kidx;
    std::vector<std::map<std::size_t, Probability>> cond(xs.size()); // x -> tau -> p
    std::vector<Value> target;
    std::vector<Value> values;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        target.push_back(f.value(xs[xi]));
        if (std::find(values.begin(), values.end(), target.back()) == values.end()) values.push_back(target.back());
        const auto td = transcript_dist(p, xs[xi]);
        for (const auto& a : td.atoms()) {
            auto [it, fresh] = kidx.emplace(a.label, keys.size());
            if (fresh) keys.push_back(a.label);
            cond[xi][it->second] += a.p;
        }
    }
    std::sort(values.begin(), values.end());
    Decoder dec;
    dec.transcripts = keys.size();
    const std::size_t T = keys.size();

    auto exact_eps = [&](const std::vector<std::size_t>& choice) {
        Probability worst = 0;
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            Probability e = 0;
            for (const auto& [tau, pr] : cond[xi])
                if (values[choice[tau]] != target[xi]) e += pr;
            worst = std::max(worst, e);
        }
        return worst;
    };

    std::vector<std::size_t> choice(T, 0);
    if (values.size() <= 1) {
        dec.is_optimal = true;
    } else if (values.size() == 2 && T <= exhaustive_limit) {
        std::vector<int> tv(xs.size());
        for (std::size_t xi = 0; xi < xs.size(); ++xi) tv[xi] = target[xi] == values[1] ? 1 : 0;
        std::vector<std::vector<std::pair<std::size_t, double>>> by_tau(T);
        for (std::size_t xi = 0; xi < xs.size(); ++xi)
            for (const auto& [tau, pr] : cond[xi]) by_tau[tau].emplace_back(xi, to_double(pr));
        std::vector<double> err(xs.size());
        for (std::size_t xi = 0; xi < xs.size(); ++xi) err[xi] = tv[xi] == 0 ? 0.0 : 1.0;
        std::vector<int> cur(T, 0);
        auto worst = [&] { return *std::max_element(err.begin(), err.end()); };
        double best = worst();
        std::vector<int> best_choice = cur;
        const std::uint64_t total = 1ULL << T;
        for (std::uint64_t g = 1; g < total; ++g) {
            const std::size_t b = static_cast<std::size_t>(__builtin_ctzll(g));
            cur[b] ^= 1;
            for (const auto& [xi, pr] : by_tau[b]) err[xi] += cur[b] == tv[xi] ? -pr : pr;
            double w = worst();
            if (w < best - 1e-15) {
                best = w;
                best_choice = cur;
            }
        }
        for (std::size_t tau = 0; tau < T; ++tau) choice[tau] = static_cast<std::size_t>(best_choice[tau]);
        dec.is_optimal = true;
    } else {
        for (std::size_t tau = 0; tau < T; ++tau) {
            std::vector<Probability> score(values.size(), 0);
            for (std::size_t xi = 0; xi < xs.size(); ++xi) {
                auto it = cond[xi].find(tau);
                if (it == cond[xi].end()) continue;
                auto v = static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), target[xi]) - values.begin());
                score[v] += it->second;
            }
            choice[tau] = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
        }
    }
    dec.eps = exact_eps(choice);
    if (dec.eps == 0) dec.is_optimal = true;
    for (std::size_t tau = 0; tau < T; ++tau) dec.theta[keys[tau]] = values.empty() ? Value{} : values[choice[tau]];
    return dec;
}

// Doubles each bit and closes the component with "01".
inline std::string encode_component(const std::vector<BitString>& msgs) {
    std::string out;
    for (const auto& m : msgs)
        for (char c : m.str()) {
            out.push_back(c);
            out.push_back(c);
        }
    return out + "01";
}

// Self-delimiting encoding of Pi_i: per other player j, the read then the sent component.
inline std::string prefix_free_encode(const Transcript& t, int i) {
    std::string out;
    for (int j = 0; j < t.k; ++j) {
        if (j == i) continue;
        out += encode_component(t.read[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        out += encode_component(t.sent[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    return out;
}

} // namespace p2pic
