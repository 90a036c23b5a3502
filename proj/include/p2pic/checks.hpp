#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "executor.hpp"
#include "info.hpp"
#include "joint_table.hpp"
#include "measures.hpp"
#include "transforms.hpp"
#include "zoo.hpp"

namespace p2pic {

// Orientation is always lhs >= rhs (relation spells out the original statement).
// Exact checks report satisfied instances as lhs and total instances as rhs.
struct CheckReport {
    std::string name;
    std::string subject;
    double lhs = 0, rhs = 0, margin = 0;
    bool pass = false;
    std::string relation;
    std::string rule = "ineq"; // ineq: margin >= -tol; eq: |margin| <= tol; exact: counts must agree
    double runtime_ms = 0;
    std::string detail;
    std::vector<std::string> witnesses;
};

inline CheckReport make_ineq(std::string name, std::string subject, long double lhs, long double rhs, std::string relation,
                             double tol = kTol) {
    CheckReport r;
    r.name = std::move(name);
    r.subject = std::move(subject);
    r.lhs = static_cast<double>(lhs);
    r.rhs = static_cast<double>(rhs);
    r.margin = static_cast<double>(lhs - rhs);
    r.pass = lhs - rhs >= -tol;
    r.relation = std::move(relation);
    return r;
}

inline CheckReport make_eq(std::string name, std::string subject, long double lhs, long double rhs, std::string relation,
                           double tol = kTol) {
    CheckReport r = make_ineq(std::move(name), std::move(subject), lhs, rhs, std::move(relation), tol);
    r.pass = std::fabs(static_cast<double>(lhs - rhs)) <= tol;
    r.rule = "eq";
    return r;
}

inline CheckReport make_exact(std::string name, std::string subject, std::size_t ok, std::size_t total, std::string relation) {
    CheckReport r;
    r.name = std::move(name);
    r.subject = std::move(subject);
    r.lhs = static_cast<double>(ok);
    r.rhs = static_cast<double>(total);
    r.margin = r.lhs - r.rhs;
    r.pass = ok == total;
    r.relation = std::move(relation);
    r.rule = "exact";
    return r;
}

// Re-judges a report at another tolerance; exact reports are unaffected.
inline void apply_tolerance(CheckReport& r, double tol) {
    if (r.rule == "ineq") r.pass = r.margin >= -tol;
    else if (r.rule == "eq") r.pass = std::fabs(r.margin) <= tol;
}

template <class F>
CheckReport timed(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    CheckReport r = f();
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------------------------------------
// Every (x, r) with r fully assigned, plus the per-player probability factors of r.

struct FullRecord {
    InputTuple x;
    RandomAssignment r;
    std::vector<Probability> p_priv; // P_i(r_i)
    Probability p_pub;
    std::vector<std::string> pi_i;
    std::string pi;
};

inline Probability component_prob(const RandomSpace& s, const std::vector<int>& atoms) {
    Probability p = 1;
    for (std::size_t c = 0; c < s.size(); ++c) p *= s[c].probs.at(static_cast<std::size_t>(atoms[c]));
    return p;
}

// pub_fixed restricts the enumeration to one public randomness atom.
inline std::vector<FullRecord> enumerate_full(const Protocol& p, const std::vector<InputTuple>& xs, std::size_t cap = kDefaultCap,
                                              const std::vector<int>* pub_fixed = nullptr) {
    std::vector<FullRecord> out;
    PathOptions po;
    if (pub_fixed) {
        po.root = p.empty_assignment();
        po.root->pub = *pub_fixed;
    }
    for (const auto& x : xs)
        for_each_path(p, x, [&](const RandomAssignment& a, const Probability& pr, const ExecutionResult& res) {
            detail::expand_unread(p, a, pr, true, [&](const RandomAssignment& full, const Probability&) {
                FullRecord rec;
                rec.x = x;
                rec.r = full;
                for (int i = 0; i < p.k; ++i) {
                    rec.p_priv.push_back(component_prob(p.private_rand[static_cast<std::size_t>(i)], full.priv[static_cast<std::size_t>(i)]));
                    rec.pi_i.push_back(res.transcript.player_key(i));
                }
                rec.p_pub = component_prob(p.public_rand, full.pub);
                rec.pi = res.transcript.key();
                if (out.size() >= cap) throw Error(ErrorKind::SupportTooLarge, "full enumeration exceeds cap");
                out.push_back(std::move(rec));
            });
        }, po);
    return out;
}

// Every atom of the public randomness space, in lexicographic order.
inline std::vector<std::vector<int>> public_atoms(const Protocol& p) {
    std::vector<std::vector<int>> out{{}};
    for (const auto& comp : p.public_rand) {
        std::vector<std::vector<int>> next;
        for (const auto& a : out)
            for (std::size_t v = 0; v < comp.probs.size(); ++v)
                if (comp.probs[v] > 0) {
                    next.push_back(a);
                    next.back().push_back(static_cast<int>(v));
                }
        out = std::move(next);
    }
    return out;
}

namespace detail {

inline std::string own_key(const FullRecord& r, int i) {
    return value_key(r.x[static_cast<std::size_t>(i)]) + "|" + join_atoms(r.r.priv[static_cast<std::size_t>(i)]);
}

inline std::string rest_key(const FullRecord& r, int i) {
    std::string s;
    for (std::size_t j = 0; j < r.x.size(); ++j) {
        if (static_cast<int>(j) == i) continue;
        s += value_key(r.x[j]) + "|" + join_atoms(r.r.priv[j]) + ";";
    }
    return s;
}

inline std::string rest_x_key(const InputTuple& x, int i) {
    std::string s;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (static_cast<int>(j) != i) s += value_key(x[j]) + ";";
    return s;
}

inline bool is_product_domain(const std::vector<InputTuple>& xs, int k) {
    std::vector<std::set<Value>> axes(static_cast<std::size_t>(k));
    std::set<InputTuple> all(xs.begin(), xs.end());
    for (const auto& x : all)
        for (int i = 0; i < k; ++i) axes[static_cast<std::size_t>(i)].insert(x[static_cast<std::size_t>(i)]);
    long double prod = 1;
    for (const auto& a : axes) prod *= static_cast<long double>(a.size());
    return prod == static_cast<long double>(all.size());
}

} // namespace detail

namespace detail {

struct LazyPath {
    InputTuple x;
    RandomAssignment a; // unread components stay -1
    std::vector<std::string> pi_i;
    std::string pi;
};

inline std::vector<LazyPath> lazy_paths(const Protocol& p, const RandomAssignment& root) {
    std::vector<LazyPath> out;
    PathOptions po;
    po.root = root;
    for (const auto& x : p.input_space)
        for_each_path(p, x, [&](const RandomAssignment& a, const Probability&, const ExecutionResult& res) {
            LazyPath lp{x, a, {}, res.transcript.key()};
            for (int i = 0; i < p.k; ++i) lp.pi_i.push_back(res.transcript.player_key(i));
            out.push_back(std::move(lp));
        }, po);
    return out;
}

// Each lazy path is a product cylinder, so a union of them is a rectangle iff every mix of player i's
// part of one with the others' part of another stays inside; a mix is checked on all its completions.
struct MixTally {
    std::size_t ok = 0, total = 0;
    std::vector<std::string> bad;
};

inline void rect_by_mixing(const Protocol& p, const RandomAssignment& root, const std::string& tag, MixTally& tally) {
    const auto paths = lazy_paths(p, root);
    for (int i = 0; i < p.k; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        using Part = std::pair<InputTuple, RandomAssignment>;
        auto own_part = [&](const LazyPath& lp) {
            return std::pair<Value, std::vector<int>>(lp.x[ui], lp.a.priv[ui]);
        };
        auto rest_part = [&](const LazyPath& lp) {
            Part r{lp.x, lp.a};
            r.second.priv[ui].assign(r.second.priv[ui].size(), -1);
            return r;
        };
        std::map<std::string, std::set<std::pair<Value, std::vector<int>>>> own_by_ti;
        std::map<std::string, std::vector<Part>> rest_by_ti, rest_by_t;
        std::map<std::string, std::set<std::string>> seen_ti, seen_t;
        std::map<std::string, std::string> ti_of;
        for (const auto& lp : paths) {
            const std::string& ti = lp.pi_i[ui];
            own_by_ti[ti].insert(own_part(lp));
            Part rp = rest_part(lp);
            const std::string rk = input_key(rp.first) + "/" + detail::join_atoms(rp.second.pub);
            std::string full_rk = rk;
            for (const auto& v : rp.second.priv) full_rk += "/" + detail::join_atoms(v);
            if (seen_ti[ti].insert(full_rk).second) rest_by_ti[ti].push_back(rp);
            if (seen_t[lp.pi].insert(full_rk).second) rest_by_t[lp.pi].push_back(rp);
            ti_of[lp.pi] = ti;
        }
        auto mixes_inside = [&](const std::pair<Value, std::vector<int>>& own, const Part& rest, auto&& accept) {
            InputTuple x = rest.first;
            x[ui] = own.first;
            PathOptions po;
            po.root = rest.second;
            po.root->priv[ui] = own.second;
            bool inside = true;
            for_each_path(p, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& res) {
                inside = inside && accept(res.transcript);
            }, po);
            return inside;
        };
        for (const auto& [ti, owns] : own_by_ti) {
            ++tally.total;
            bool good = true;
            for (const auto& o : owns)
                for (const auto& r : rest_by_ti[ti])
                    good = good && mixes_inside(o, r, [&](const Transcript& t) { return t.player_key(i) == ti; });
            if (good) ++tally.ok;
            else if (tally.bad.size() < 8) tally.bad.push_back(tag + "A_" + std::to_string(i + 1) + " not a rectangle at " + ti);
        }
        for (const auto& [t, rests] : rest_by_t) {
            ++tally.total;
            bool good = true;
            for (const auto& o : own_by_ti[ti_of[t]])
                for (const auto& r : rests) good = good && mixes_inside(o, r, [&](const Transcript& tr) { return tr.key() == t; });
            if (good) ++tally.ok;
            else if (tally.bad.size() < 8) tally.bad.push_back(tag + "B not I_" + std::to_string(i + 1) + " x H at " + t);
        }
    }
}

} // namespace detail

// A_i(t) = I_i(t) x J_i(t) and B(t) = I_i(t_i) x H_i(t), by cardinality (the inclusion is immediate).
inline CheckReport check_rect_deterministic(const Protocol& p, bool per_public_atom = false) {
    return timed([&] {
        if (p.has_public_coins() && !per_public_atom)
            throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        if (!detail::is_product_domain(p.input_space, p.k))
            throw Error(ErrorKind::InvalidArgument, "rectangularity needs a product input domain");
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        auto check_atom = [&](const std::vector<FullRecord>& rs, const std::string& tag) {
            for (int i = 0; i < p.k; ++i) {
                std::map<std::string, std::set<std::string>> A, I, J;
                std::map<std::string, std::set<std::string>> B, H;
                std::map<std::string, std::string> tau_i_of;
                for (const FullRecord& r : rs) {
                    const std::string own = detail::own_key(r, i), rest = detail::rest_key(r, i);
                    const std::string& ti = r.pi_i[static_cast<std::size_t>(i)];
                    A[ti].insert(own + "#" + rest);
                    I[ti].insert(own);
                    J[ti].insert(rest);
                    B[r.pi].insert(own + "#" + rest);
                    H[r.pi].insert(rest);
                    tau_i_of[r.pi] = ti;
                }
                for (const auto& [ti, set] : A) {
                    ++total;
                    if (set.size() == I[ti].size() * J[ti].size()) ++ok;
                    else if (bad.size() < 8) bad.push_back(tag + "A_" + std::to_string(i + 1) + " not a rectangle at " + ti);
                }
                for (const auto& [t, set] : B) {
                    ++total;
                    if (set.size() == I[tau_i_of[t]].size() * H[t].size()) ++ok;
                    else if (bad.size() < 8) bad.push_back(tag + "B not I_" + std::to_string(i + 1) + " x H at " + t);
                }
            }
        };
        if (p.has_public_coins()) {
            detail::MixTally tally;
            for (const auto& atom : public_atoms(p)) {
                RandomAssignment root = p.empty_assignment();
                root.pub = atom;
                detail::rect_by_mixing(p, root, "public " + detail::join_atoms(atom) + ": ", tally);
            }
            ok = tally.ok;
            total = tally.total;
            bad = tally.bad;
        } else {
            check_atom(enumerate_full(p, p.input_space), "");
        }
        auto rep = make_exact("rect_deterministic", p.name, ok, total, "A_i = I_i x J_i and B = I_i x H_i");
        rep.witnesses = bad;
        if (per_public_atom && p.has_public_coins()) rep.detail = "checked per public randomness atom";
        return rep;
    });
}

// Pr[Pi_i(x)=t_i] = q_i(x_i,t_i) q_{-i}(x_{-i},t_i) and Pr[Pi(x)=t] = q_i(x_i,t_i) p_{-i}(x_{-i},t), exactly.
inline CheckReport check_rect_randomized(const Protocol& p) {
    return timed([&] {
        if (p.has_public_coins()) throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        if (!detail::is_product_domain(p.input_space, p.k))
            throw Error(ErrorKind::InvalidArgument, "rectangularity needs a product input domain");
        auto recs = enumerate_full(p, p.input_space);
        std::set<InputTuple> xs(p.input_space.begin(), p.input_space.end());
        std::set<std::string> T;
        for (const auto& r : recs) T.insert(r.pi);
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        for (int i = 0; i < p.k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            // Witness sets and their probability-weighted projections.
            std::map<std::string, std::map<std::string, Probability>> Iw, Jw, Hw; // tau -> key -> weight
            std::map<std::string, std::set<std::string>> Iset, Jset, Hset;
            std::map<std::string, std::map<std::string, Probability>> lhs_i, lhs_full; // x -> tau -> prob
            std::set<std::string> Ti;
            for (const auto& r : recs) {
                Probability p_rest = 1;
                for (int j = 0; j < p.k; ++j)
                    if (j != i) p_rest *= r.p_priv[static_cast<std::size_t>(j)];
                const std::string& ti = r.pi_i[ui];
                Ti.insert(ti);
                const std::string own = detail::own_key(r, i), rest = detail::rest_key(r, i);
                const std::string xo = value_key(r.x[ui]), xr = detail::rest_x_key(r.x, i);
                if (Iset[ti].insert(own).second) Iw[ti][xo] += r.p_priv[ui];
                if (Jset[ti].insert(rest).second) Jw[ti][xr] += p_rest;
                if (Hset[r.pi].insert(rest).second) Hw[r.pi][xr] += p_rest;
                const std::string xk = input_key(r.x);
                lhs_i[xk][ti] += r.p_priv[ui] * p_rest;
                lhs_full[xk][r.pi] += r.p_priv[ui] * p_rest;
            }
            auto get = [](auto& m, const std::string& a, const std::string& b) -> Probability {
                auto it = m.find(a);
                if (it == m.end()) return 0;
                auto jt = it->second.find(b);
                return jt == it->second.end() ? Probability(0) : jt->second;
            };
            std::map<std::string, std::string> tau_i_of;
            for (const auto& r : recs) tau_i_of[r.pi] = r.pi_i[ui];
            for (const auto& x : xs) {
                const std::string xk = input_key(x), xo = value_key(x[ui]), xr = detail::rest_x_key(x, i);
                for (const auto& ti : Ti) {
                    ++total;
                    if (get(lhs_i, xk, ti) == get(Iw, ti, xo) * get(Jw, ti, xr)) ++ok;
                    else if (bad.size() < 8) bad.push_back("player " + std::to_string(i + 1) + " x=" + xk + " t=" + ti);
                }
                for (const auto& t : T) {
                    ++total;
                    if (get(lhs_full, xk, t) == get(Iw, tau_i_of[t], xo) * get(Hw, t, xr)) ++ok;
                    else if (bad.size() < 8) bad.push_back("full, player " + std::to_string(i + 1) + " x=" + xk + " t=" + t);
                }
            }
        }
        auto rep = make_exact("rect_randomized", p.name, ok, total, "Pr[Pi_i(x)=t_i] = q_i q_-i and Pr[Pi(x)=t] = q_i p_-i");
        rep.witnesses = bad;
        return rep;
    });
}

// Under mu: Pr[Pi_i=t_i | X_i=x', M=m, Z=z] = q_i(x',t_i) c_i(m,z,t_i) and the analogue for Pi, for z != i.
// Existence of c_i, c is verified exactly: the ratio must not depend on x' and must vanish where q_i does.
inline CheckReport check_rect_mu(const Protocol& p) {
    return timed([&] {
        if (p.has_public_coins()) throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        const int k = p.k;
        auto mu = dist_mu(k);
        auto cube = boolean_cube(k, 1);
        auto recs = enumerate_full(p, cube);
        std::map<InputTuple, std::vector<const FullRecord*>> by_x;
        for (const auto& r : recs) by_x[r.x].push_back(&r);
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        for (int i = 0; i < k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            std::map<std::string, std::map<int, Probability>> q; // t_i -> x' -> q_i
            std::map<std::string, std::set<std::string>> Iset;
            std::map<std::string, std::string> tau_i_of;
            for (const auto& r : recs) {
                const std::string& ti = r.pi_i[ui];
                tau_i_of[r.pi] = ti;
                if (Iset[ti].insert(detail::own_key(r, i)).second) q[ti][r.x[ui][0]] += r.p_priv[ui];
            }
            for (int z = 0; z < k; ++z) {
                if (z == i) continue;
                for (int m = 0; m < 2; ++m) {
                    // Conditional laws for each x' with a positive conditioning event.
                    std::map<int, std::map<std::string, Probability>> law_i, law;
                    std::set<int> feasible;
                    for (int xp = 0; xp < 2; ++xp) {
                        Probability ev = 0;
                        std::map<std::string, Probability> li, lf;
                        for (const auto& a : mu.atoms()) {
                            if (a.value.aux[0].second[0] != m || a.value.aux[1].second[0] != z || a.value.x[ui][0] != xp) continue;
                            ev += a.p;
                            for (const FullRecord* r : by_x[a.value.x]) {
                                Probability w = a.p;
                                for (const auto& pp : r->p_priv) w *= pp;
                                li[r->pi_i[ui]] += w;
                                lf[r->pi] += w;
                            }
                        }
                        if (ev == 0) continue;
                        feasible.insert(xp);
                        for (auto& [t, w] : li) law_i[xp][t] = w / ev;
                        for (auto& [t, w] : lf) law[xp][t] = w / ev;
                    }
                    auto verify = [&](const std::map<int, std::map<std::string, Probability>>& L, const std::string& t,
                                      const std::string& ti, const char* which) {
                        ++total;
                        std::optional<Probability> c;
                        bool good = true;
                        for (int xp : feasible) {
                            auto lt = L.at(xp).find(t);
                            Probability lhs = lt == L.at(xp).end() ? Probability(0) : lt->second;
                            Probability qv = q[ti].count(xp) ? q[ti][xp] : Probability(0);
                            if (qv == 0) {
                                good = good && lhs == 0;
                                continue;
                            }
                            Probability ratio = lhs / qv;
                            if (!c) c = ratio;
                            else good = good && *c == ratio;
                        }
                        if (good) ++ok;
                        else if (bad.size() < 8)
                            bad.push_back(std::string(which) + " player " + std::to_string(i + 1) + " m=" + std::to_string(m) +
                                          " z=" + std::to_string(z + 1) + " t=" + t);
                    };
                    for (const auto& [ti, qs] : q) verify(law_i, ti, ti, "c_i");
                    for (const auto& [t, ti] : tau_i_of) verify(law, t, ti, "c");
                }
            }
        }
        auto rep = make_exact("rect_mu", p.name, ok, total, "Pr[Pi_i | x_i,m,z] = q_i c_i and Pr[Pi | x_i,m,z] = q_i c");
        rep.witnesses = bad;
        return rep;
    });
}

inline InputTuple with_coord(InputTuple x, int i, const Value& v) {
    x[static_cast<std::size_t>(i)] = v;
    return x;
}

inline CheckReport check_diagonal(const Protocol& p, const InputTuple& x, const InputTuple& y, int i) {
    return timed([&] {
        if (p.has_public_coins()) throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        auto ui = static_cast<std::size_t>(i);
        auto px = transcript_dist(p, x), py = transcript_dist(p, y);
        auto py_x = transcript_dist(p, with_coord(y, i, x[ui]));
        auto px_y = transcript_dist(p, with_coord(x, i, y[ui]));
        long double lhs = hellinger_sq(px, py);
        long double rhs = (hellinger_sq(px, py_x) + hellinger_sq(px_y, py)) / 2;
        auto rep = make_ineq("diagonal", p.name, lhs, rhs, "h2(Pi(x),Pi(y)) >= [h2(Pi(x),Pi(y[i<-x_i])) + h2(Pi(x[i<-y_i]),Pi(y))]/2");
        rep.detail = "x=" + input_key(x) + " y=" + input_key(y) + " i=" + std::to_string(i + 1);
        return rep;
    });
}

// e_{a,b}: all ones except zeros at a and b.
inline InputTuple e_vec(int k, std::vector<int> zeros) {
    InputTuple x(static_cast<std::size_t>(k), Value{1});
    for (int z : zeros) x[static_cast<std::size_t>(z)] = Value{0};
    return x;
}

// h2(Pi_i[0,0,j], Pi_i[1,1,j]) >= h2(Pi_i(e_{i,j}), Pi_i(e_j)) / 2
inline CheckReport check_diagonal_mu(const Protocol& p, const JointTable& mu_table, int i, int j) {
    return timed([&] {
        if (p.has_public_coins()) throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        if (i == j) throw Error(ErrorKind::InvalidArgument, "diagonal under mu needs i != j");
        const std::string zj = std::to_string(j);
        auto a = mu_table.conditional({col_pi(i)}, {col_x(i), "M", "Z"}, {"0", "0", zj});
        auto b = mu_table.conditional({col_pi(i)}, {col_x(i), "M", "Z"}, {"1", "1", zj});
        auto c = transcript_dist(p, e_vec(p.k, {i, j}), i);
        auto d = transcript_dist(p, e_vec(p.k, {j}), i);
        auto rep = make_ineq("diagonal_mu", p.name, hellinger_sq(a, b), hellinger_sq(c, d) / 2,
                             "h2(Pi_i[0,0,j],Pi_i[1,1,j]) >= h2(Pi_i(e_ij),Pi_i(e_j))/2");
        rep.detail = "i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1);
        return rep;
    });
}

inline CheckReport check_localization(const Protocol& p, int i, int j) {
    return timed([&] {
        if (i == j) throw Error(ErrorKind::InvalidArgument, "localization needs i != j");
        if (p.has_public_coins()) throw Error(ErrorKind::PublicCoinsPresent, p.name + " uses public randomness");
        auto eij = e_vec(p.k, {i, j}), ej = e_vec(p.k, {j});
        long double lhs = hellinger(transcript_dist(p, eij, i), transcript_dist(p, ej, i));
        long double rhs = hellinger(transcript_dist(p, eij), transcript_dist(p, ej));
        auto rep = make_eq("localization", p.name, lhs, rhs, "h(Pi_i(e_ij),Pi_i(e_j)) == h(Pi(e_ij),Pi(e_j))");
        rep.detail = "i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1);
        return rep;
    });
}

inline CheckReport check_hellinger_error(const Protocol& p, const FunctionSpec& f, const InputTuple& x, const InputTuple& y) {
    return timed([&] {
        if (f.value(x) == f.value(y)) throw Error(ErrorKind::SameFunctionValue, "f(x) = f(y)");
        Decoder dec = best_external_decoder(p, f, p.input_space);
        const long double eps = to_long_double(dec.eps);
        auto rep = make_ineq("hellinger_error", p.name, hellinger(transcript_dist(p, x), transcript_dist(p, y)),
                             (1 - 2 * eps) / std::sqrt(2.0L), "h(Pi(x),Pi(y)) >= (1-2eps)/sqrt2");
        rep.detail = "eps_ext=" + to_string(dec.eps) + (dec.is_optimal ? "" : " (upper bound)") + " x=" + input_key(x) +
                     " y=" + input_key(y);
        return rep;
    });
}

inline std::vector<CheckReport> check_cc_vs_measures(const Protocol& p, const InputDistribution& d) {
    auto t0 = std::chrono::steady_clock::now();
    const long double cc = static_cast<long double>(communication_cost(p));
    JointTable t = build_joint(p, d);
    const long double m = mic(t).value;
    long double sum_h = 0;
    for (int i = 0; i < p.k; ++i) sum_h += t.entropy({col_pi(i)});
    const long double k2 = static_cast<long double>(p.k) * p.k;
    auto a = make_ineq("cc_ge_mic", p.name, cc, m / 8 - k2, "CC >= MIC/8 - k^2");
    auto b = make_ineq("entropy_le_cc", p.name, 4 * cc + 4 * k2, sum_h, "sum_i H(Pi_i) <= 4 CC + 4 k^2");
    a.detail = b.detail = "CC=" + std::to_string(static_cast<long long>(cc)) + " MIC=" + std::to_string(static_cast<double>(m)) +
                          " sumH=" + std::to_string(static_cast<double>(sum_h));
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    a.runtime_ms = b.runtime_ms = ms;
    return {a, b};
}

inline CheckReport check_smic_and_lower_bound(const Protocol& p) {
    return timed([&] {
        Decoder dec = best_external_decoder(p, fn_and(p.k), p.input_space);
        if (dec.eps * 2 >= 1) throw Error(ErrorKind::EpsilonTooLarge, "external error " + to_string(dec.eps) + " >= 1/2");
        JointOptions jo;
        jo.private_rand = false;
        JointTable t = build_joint(p, dist_mu(p.k), jo);
        const long double eps = to_long_double(dec.eps);
        const long double bound = (p.k - 1) * (1 - 2 * eps) * (1 - 2 * eps) / 96;
        auto rep = make_ineq("smic_and_lower_bound", p.name, smic(t).value, bound, "SMIC_mu >= (k-1)(1-2eps)^2/96");
        rep.detail = "eps_ext=" + to_string(dec.eps) + (dec.is_optimal ? "" : " (upper bound)");
        return rep;
    });
}

inline CheckReport check_mic_parity_lower_bound(const Protocol& p) {
    return timed([&] {
        auto u = dist_uniform(p.k, 1);
        ErrorRate er = error_rate(p, fn_parity(p.k, 1), u);
        const Probability eps = er.per_player.at(0);
        if (eps * 2 >= 1) throw Error(ErrorKind::EpsilonTooLarge, "player 1 error " + to_string(eps) + " >= 1/2");
        JointTable t = build_joint(p, u);
        const long double bound = (p.k - 1) * (1 - binary_entropy(to_long_double(eps)));
        auto rep = make_ineq("mic_parity_lower_bound", p.name, mic(t).value, bound, "MIC_uniform >= (k-1)(1-h(eps))");
        rep.detail = "eps=" + to_string(eps);
        return rep;
    });
}

// n independent copies of a per-coordinate distribution; player inputs concatenate.
inline InputDistribution product_dist(const InputDistribution& base, int n, std::size_t cap = kDefaultCap) {
    check_cap(std::pow(static_cast<long double>(base.size()), n), cap, "product distribution");
    std::vector<InputDistribution::Atom> cur{{"", InputPoint{InputTuple(base.atoms().at(0).value.x.size()), {}}, Probability(1)}};
    for (int l = 0; l < n; ++l) {
        std::vector<InputDistribution::Atom> next;
        for (const auto& a : cur)
            for (const auto& b : base.atoms()) {
                InputPoint pt = a.value;
                for (std::size_t i = 0; i < pt.x.size(); ++i)
                    pt.x[i].insert(pt.x[i].end(), b.value.x[i].begin(), b.value.x[i].end());
                next.push_back({"", std::move(pt), a.p * b.p});
            }
        cur = std::move(next);
    }
    for (auto& a : cur) a.label = point_label(a.value);
    return InputDistribution(std::move(cur));
}

enum class DirectSumKind { MIC, SMIC };

inline CheckReport check_direct_sum(DirectSumKind kind, const Protocol& pi, int n,
                                    const InputDistribution* base = nullptr) {
    return timed([&] {
        if (kind == DirectSumKind::MIC) {
            InputDistribution b = base ? *base : dist_uniform(pi.k, 1);
            Protocol emb = embed_direct_sum(pi, b, n);
            const long double outer = mic(build_joint(pi, product_dist(b, n))).value;
            const long double inner = mic(build_joint(emb, b)).value;
            auto rep = make_ineq("direct_sum_mic", pi.name, outer, n * inner, "MIC_mu^n(pi) >= n MIC_mu(pi')");
            rep.detail = "n=" + std::to_string(n) + " MIC(pi')=" + std::to_string(static_cast<double>(inner));
            return rep;
        }
        if (pi.k <= 3) throw Error(ErrorKind::ArityTooSmall, "SMIC direct sum needs k > 3");
        Protocol red = reduce_disj_to_and(pi, n);
        JointOptions jo;
        jo.private_rand = false;
        const long double outer = smic(build_joint(pi, dist_mu_n(pi.k, n), jo)).value;
        const long double inner = smic(build_joint(red, dist_mu(pi.k), jo)).value;
        auto rep = make_ineq("direct_sum_smic", pi.name, outer, n * inner, "SMIC_mu^n(pi) >= n SMIC_mu(pi')");
        rep.detail = "n=" + std::to_string(n) + " SMIC(pi')=" + std::to_string(static_cast<double>(inner));
        return rep;
    });
}

inline CheckReport check_smic_le_mic(const JointTable& t) {
    return timed([&] {
        auto rep = make_ineq("smic_le_mic", t.id(), mic(t).value, smic(t).value, "SMIC <= MIC");
        return rep;
    });
}

// IC_hat <= PIC, IC_tilde <= PIC, SMIC <= IC_hat + IC_tilde, PIC >= SMIC/2.
inline std::vector<CheckReport> check_pic_ge_half_smic(const Protocol& p, const InputDistribution& mu_n) {
    auto t0 = std::chrono::steady_clock::now();
    if (p.has_private_coins()) throw Error(ErrorKind::PrivateCoinsPresent, p.name + " uses private randomness");
    if (!is_proper_synchronous(p)) throw Error(ErrorKind::NotProperSynchronous, p.name + " is not proper synchronous");
    JointTable t = build_joint(p, mu_n);
    const long double P = pic(t).value, S = smic(t).value;
    auto ics = intermediate_ics(t);
    const long double hat = ics.ic_hat.value, tilde = ics.ic_tilde.value;
    std::vector<CheckReport> out{
        make_ineq("ic_hat_le_pic", p.name, P, hat, "IC_hat <= PIC"),
        make_ineq("ic_tilde_le_pic", p.name, P, tilde, "IC_tilde <= PIC"),
        make_ineq("smic_le_ic_sum", p.name, hat + tilde, S, "SMIC <= IC_hat + IC_tilde"),
        make_ineq("pic_ge_half_smic", p.name, P, S / 2, "PIC >= SMIC/2"),
    };
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : out) {
        r.runtime_ms = ms;
        r.detail = "PIC=" + std::to_string(static_cast<double>(P)) + " SMIC=" + std::to_string(static_cast<double>(S)) +
                   " IC_hat=" + std::to_string(static_cast<double>(hat)) + " IC_tilde=" + std::to_string(static_cast<double>(tilde));
    }
    return out;
}

// For each player i and inputs x, x' with x_i = x'_i and f(x) = f(x'): the law of Pi_i over R_{-i}
// is identical for every fixed (r_i, r^p). Exact rational comparison.
inline CheckReport check_privacy(const Protocol& p, const FunctionSpec& f) {
    return timed([&] {
        auto recs = enumerate_full(p, p.input_space);
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        for (int i = 0; i < p.k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            // x -> (r_i, r^p) -> Pi_i -> probability over R_{-i}
            std::map<std::string, std::map<std::string, std::map<std::string, Probability>>> sig;
            std::map<std::string, InputTuple> xs;
            for (const auto& r : recs) {
                Probability w = 1;
                for (int j = 0; j < p.k; ++j)
                    if (j != i) w *= r.p_priv[static_cast<std::size_t>(j)];
                const std::string xk = input_key(r.x);
                xs[xk] = r.x;
                sig[xk][detail::join_atoms(r.r.priv[ui]) + "|" + detail::join_atoms(r.r.pub)][r.pi_i[ui]] += w;
            }
            std::map<std::string, std::vector<std::string>> classes; // (x_i, f(x)) -> inputs
            for (const auto& [xk, x] : xs) {
                std::string fv;
                for (int d : f.designated) fv += value_key(f.f(d, x)) + ";";
                classes[value_key(x[ui]) + "#" + fv].push_back(xk);
            }
            for (const auto& [cls, members] : classes)
                for (std::size_t a = 1; a < members.size(); ++a) {
                    ++total;
                    if (sig[members[0]] == sig[members[a]]) ++ok;
                    else if (bad.size() < 8)
                        bad.push_back("player " + std::to_string(i + 1) + ": x=" + members[0] + " vs x'=" + members[a]);
                }
        }
        auto rep = make_exact("privacy", p.name, ok, total, "law of Pi_i | x, r_i, r^p equal across f-equivalent x with equal x_i");
        rep.witnesses = bad;
        return rep;
    });
}

// Per-protocol form: H(Pi | X R^p) >= (PIC - k H(f(X))) / k.
inline CheckReport check_randomness_bound(const Protocol& p, const FunctionSpec& f, const InputDistribution& d) {
    return timed([&] {
        if (!check_privacy(p, f).pass) throw Error(ErrorKind::NotPrivate, p.name + " is not private for " + f.name);
        JointOptions jo;
        jo.function = &f;
        JointTable t = build_joint(p, d, jo);
        const long double R = randomness_cost(t).value, P = pic(t).value, H = t.entropy({"F"});
        auto rep = make_ineq("randomness_bound", p.name, R, (P - p.k * H) / p.k, "H(Pi|X R^p) >= (PIC - k H(f(X)))/k");
        rep.detail = "per-protocol form; PIC=" + std::to_string(static_cast<double>(P)) +
                     " H(f)=" + std::to_string(static_cast<double>(H));
        return rep;
    });
}

// H(f(X) | X_i R_i R^p Pi_i) <= h(eps) for the error eps of player i.
inline CheckReport check_output_entropy_claim(const Protocol& p, const FunctionSpec& f, int i, const InputDistribution& d) {
    return timed([&] {
        ErrorRate er = error_rate(p, f, d);
        const Probability eps = er.per_player.at(static_cast<std::size_t>(i));
        if (eps * 2 > 1) throw Error(ErrorKind::EpsilonTooLarge, "player error above 1/2");
        JointOptions jo;
        jo.function = &f;
        JointTable t = build_joint(p, d, jo);
        const long double H = cond_entropy(t, {"F"}, {col_x(i), col_r(i), "Rp", col_pi(i)});
        auto rep = make_ineq("output_entropy_claim", p.name, binary_entropy(to_long_double(eps)), H,
                             "H(f(X) | X_i R_i R^p Pi_i) <= h(eps)");
        rep.detail = "player " + std::to_string(i + 1) + " eps=" + to_string(eps);
        return rep;
    });
}

// The reduction maps (U,N,S) ~ mu to (X,M,Z) ~ mu^n: exact comparison of the two laws.
inline CheckReport check_reduction_distribution(const Protocol& red, int n) {
    return timed([&] {
        const int k = red.k;
        auto mu = dist_mu(k);
        std::map<std::string, Probability> got;
        for (const auto& atom : mu.atoms()) {
            for_each_path(red, atom.value.x, [&](const RandomAssignment& a, const Probability& pr, const ExecutionResult& res) {
                detail::expand_unread(red, a, pr, false, [&](const RandomAssignment& full, const Probability& pf) {
                    const int L = full.pub[0];
                    InputPoint pt;
                    pt.x.assign(static_cast<std::size_t>(k), Value{});
                    for (int i = 0; i < k; ++i) {
                        const std::string& xs = res.notes.at(static_cast<std::size_t>(i)).at("x");
                        for (char c : xs)
                            if (c == '0' || c == '1') pt.x[static_cast<std::size_t>(i)].push_back(c - '0');
                    }
                    Value M(static_cast<std::size_t>(n)), Z(static_cast<std::size_t>(n));
                    const std::string& mlo = res.notes.at(0).count("M_lo") ? res.notes.at(0).at("M_lo") : std::string();
                    const std::string& mhi = res.notes.at(2).count("M_hi") ? res.notes.at(2).at("M_hi") : std::string();
                    for (int s = 0; s < n - 1; ++s) {
                        const int t = s < L ? s : s + 1;
                        M[static_cast<std::size_t>(t)] = s < L ? mlo.at(static_cast<std::size_t>(s)) - '0'
                                                               : mhi.at(static_cast<std::size_t>(s - L)) - '0';
                        Z[static_cast<std::size_t>(t)] = full.pub[static_cast<std::size_t>(1 + s)];
                    }
                    M[static_cast<std::size_t>(L)] = atom.value.aux[0].second[0];
                    Z[static_cast<std::size_t>(L)] = atom.value.aux[1].second[0];
                    pt.aux = {{"M", M}, {"Z", Z}};
                    got[point_label(pt)] += atom.p * pf;
                });
            });
        }
        auto want = dist_mu_n(k, n);
        std::size_t ok = 0;
        std::vector<std::string> bad;
        for (const auto& a : want.atoms()) {
            auto it = got.find(a.label);
            if (it != got.end() && it->second == a.p) ++ok;
            else if (bad.size() < 8) bad.push_back("atom " + a.label);
        }
        std::size_t extra = 0;
        for (const auto& [l, pr] : got)
            if (want.prob_of(l) == 0) ++extra;
        auto rep = make_exact("reduction_distribution", red.name, extra == 0 ? ok : 0, want.size(), "(X,M,Z) ~ mu^n exactly");
        rep.witnesses = bad;
        if (extra) rep.witnesses.push_back(std::to_string(extra) + " atoms outside the support of mu^n");
        return rep;
    });
}

// Every (x, r) under `schedules` random schedules gives the eager transcript and outputs.
inline CheckReport check_schedule_independence(const Protocol& p, int schedules = 100, std::uint64_t seed = 1) {
    return timed([&] {
        struct Ref {
            InputTuple x;
            RandomAssignment a;
            Transcript t;
            std::vector<std::optional<Value>> out;
        };
        std::vector<Ref> refs;
        for (const auto& x : p.input_space)
            for_each_path(p, x, [&](const RandomAssignment& a, const Probability&, const ExecutionResult& r) {
                refs.push_back({x, a, r.transcript, r.outputs});
            });
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        for (int s = 0; s < schedules; ++s) {
            Schedule sch = Schedule::random(seed + static_cast<std::uint64_t>(s));
            for (const auto& ref : refs) {
                ++total;
                bool same = false;
                try {
                    auto r = execute(p, ref.x, ref.a, sch);
                    same = r.transcript == ref.t && r.outputs == ref.out;
                } catch (const UnassignedComponent&) {
                    same = false;
                }
                if (same) ++ok;
                else if (bad.size() < 8) bad.push_back("schedule " + std::to_string(s) + " x=" + input_key(ref.x));
            }
        }
        auto rep = make_exact("schedule_independence", p.name, ok, total, "transcripts identical across schedules");
        rep.witnesses = bad;
        rep.detail = std::to_string(schedules) + " schedules x " + std::to_string(refs.size()) + " executions";
        return rep;
    });
}

} // namespace p2pic
