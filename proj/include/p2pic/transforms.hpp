#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "executor.hpp"
#include "model.hpp"
#include "zoo.hpp"

namespace p2pic {

// ---------------------------------------------------------------------------------------------
// External computation: every bit b is sent as bb; on halting, player 0 appends o(1-o) to its
// final message to player 1 (or sends it alone), o being the first bit of its output.

inline BitString double_bits(const BitString& m) {
    BitString out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.push_back(m.bit(i));
        out.push_back(m.bit(i));
    }
    return out;
}

// Inverse of double_bits; stops at the first unequal pair (the halting marker).
inline BitString undouble_bits(const BitString& m) {
    BitString out;
    for (std::size_t i = 0; i + 1 < m.size(); i += 2) {
        if (m.bit(i) != m.bit(i + 1)) break;
        out.push_back(m.bit(i));
    }
    return out;
}

inline Protocol to_external(const Protocol& pi) {
    Protocol p = pi;
    p.name = "to_external(" + pi.name + ")";
    p.lineage.push_back({pi.name, "to_external", {{"output_player", "1"}, {"marker_to", "2"}}, {}});
    for (int i = 0; i < p.k; ++i) {
        auto inner = pi.programs[static_cast<std::size_t>(i)];
        p.programs[static_cast<std::size_t>(i)] = [inner, i](const View& v) {
            View iv = v;
            for (auto& link : iv.read)
                for (auto& m : link) m = undouble_bits(m);
            for (auto& link : iv.sent)
                for (auto& m : link) m = undouble_bits(m);
            StepResult r = inner(iv);
            for (auto& [to, m] : r.sends) m = double_bits(m);
            if (i == 0 && r.output) {
                const int b = r.output->empty() ? 0 : ((*r.output)[0] & 1);
                BitString marker = BitString::from_bit(b);
                marker.push_back(1 - b);
                auto it = std::find_if(r.sends.begin(), r.sends.end(), [](const auto& s) { return s.first == 1; });
                if (it != r.sends.end()) it->second += marker;
                else {
                    r.sends.emplace_back(1, marker);
                    std::sort(r.sends.begin(), r.sends.end(), [](const auto& a, const auto& b2) { return a.first < b2.first; });
                }
            }
            return r;
        };
    }
    return p;
}

// ---------------------------------------------------------------------------------------------
// Proper synchronous form. One padded round advances every inner program by at most one local
// round; a round's inner messages travel as "1"+m and silence as the one-bit atom "0".

namespace detail {

struct InnerReplay {
    int round = 0;
    bool halted = false;
    bool waiting = false;
    std::vector<int> wait;
    std::optional<Value> output;
    LinkLog read, sent;
    std::vector<std::vector<BitString>> buffer; // unread inner messages per sender
};

inline StepResult inner_step(const LocalProgram& prog, const View& outer, const InnerReplay& st) {
    View iv;
    iv.player = outer.player;
    iv.k = outer.k;
    iv.input = outer.input;
    iv.rand = outer.rand;
    iv.read = st.read;
    iv.sent = st.sent;
    iv.round = st.round;
    return prog(iv);
}

inline void inner_try_complete(InnerReplay& st) {
    if (!st.waiting) return;
    for (int j : st.wait)
        if (st.buffer[static_cast<std::size_t>(j)].empty()) return;
    for (int j : st.wait) {
        auto& b = st.buffer[static_cast<std::size_t>(j)];
        st.read[static_cast<std::size_t>(j)].push_back(b.front());
        b.erase(b.begin());
    }
    st.waiting = false;
    st.wait.clear();
    ++st.round;
}

inline void inner_apply(InnerReplay& st, StepResult r) {
    for (auto& [to, m] : r.sends) st.sent[static_cast<std::size_t>(to)].push_back(m);
    if (r.output) {
        st.halted = true;
        st.output = std::move(r.output);
    } else {
        st.waiting = true;
        st.wait = std::move(r.wait);
    }
}

} // namespace detail

// Number of lockstep rounds after which every inner player has halted, over all inputs and randomness.
inline int lockstep_halting_rounds(const Protocol& pi) {
    int worst = 0;
    const int k = pi.k;
    for (const auto& x : pi.input_space) {
        lazy_enumerate(
            pi,
            [&](const RandomAssignment& a) {
                std::vector<detail::InnerReplay> st(static_cast<std::size_t>(k));
                for (auto& s : st) {
                    s.read.assign(static_cast<std::size_t>(k), {});
                    s.sent.assign(static_cast<std::size_t>(k), {});
                    s.buffer.assign(static_cast<std::size_t>(k), {});
                }
                int rounds = 0;
                while (true) {
                    bool all = std::all_of(st.begin(), st.end(), [](const auto& s) { return s.halted; });
                    if (all) break;
                    if (rounds >= pi.max_rounds)
                        throw Error(ErrorKind::RoundBoundExceeded, "lockstep simulation exceeds round bound");
                    bool progress = false;
                    std::vector<std::vector<std::pair<int, BitString>>> outgoing(static_cast<std::size_t>(k));
                    for (int i = 0; i < k; ++i) {
                        auto& s = st[static_cast<std::size_t>(i)];
                        if (s.halted || s.waiting) continue;
                        View outer;
                        outer.player = i;
                        outer.k = k;
                        outer.input = x[static_cast<std::size_t>(i)];
                        outer.rand = RandomAccess{&a, i, 0, 0};
                        StepResult r = detail::inner_step(pi.programs[static_cast<std::size_t>(i)], outer, s);
                        detail::check_step(r, i, k);
                        outgoing[static_cast<std::size_t>(i)] = r.sends;
                        detail::inner_apply(s, std::move(r));
                        progress = true;
                    }
                    for (int i = 0; i < k; ++i)
                        for (auto& [to, m] : outgoing[static_cast<std::size_t>(i)])
                            st[static_cast<std::size_t>(to)].buffer[static_cast<std::size_t>(i)].push_back(m);
                    for (auto& s : st) {
                        bool was = s.waiting;
                        detail::inner_try_complete(s);
                        progress = progress || (was && !s.waiting);
                    }
                    ++rounds;
                    if (!progress) throw Error(ErrorKind::Deadlock, "lockstep simulation makes no progress");
                }
                return rounds;
            },
            [&](const RandomAssignment&, const Probability&, int r) { worst = std::max(worst, r); });
    }
    return worst;
}

inline Protocol to_proper_synchronous(const Protocol& pi) {
    const int k = pi.k;
    const int tf = lockstep_halting_rounds(pi) + 1;
    Protocol p = pi;
    p.name = "to_proper_synchronous(" + pi.name + ")";
    p.max_rounds = tf;
    p.lineage.push_back({pi.name, "to_proper_synchronous", {{"t_f", std::to_string(tf)}, {"empty_atom", "0"}}, {}});
    for (int i = 0; i < k; ++i) {
        auto inner = pi.programs[static_cast<std::size_t>(i)];
        p.programs[static_cast<std::size_t>(i)] = [inner, i, k, tf](const View& v) {
            detail::InnerReplay st;
            st.read.assign(static_cast<std::size_t>(k), {});
            st.sent.assign(static_cast<std::size_t>(k), {});
            st.buffer.assign(static_cast<std::size_t>(k), {});
            auto step_now = [&]() -> StepResult {
                StepResult r = detail::inner_step(inner, v, st);
                detail::check_step(r, i, k);
                return r;
            };
            // Replay the inner program through the padded rounds already completed.
            for (int s = 0; s < v.round; ++s) {
                if (!st.halted && !st.waiting) detail::inner_apply(st, step_now());
                for (int j = 0; j < k; ++j) {
                    if (j == i) continue;
                    const BitString& m = v.read[static_cast<std::size_t>(j)].at(static_cast<std::size_t>(s));
                    if (m.bit(0) == 1) st.buffer[static_cast<std::size_t>(j)].push_back(m.substr(1));
                }
                detail::inner_try_complete(st);
            }
            StepResult out;
            if (v.round == tf - 1) {
                if (!st.halted) throw Error(ErrorKind::InvalidProtocol, "inner program still running at t_f");
                out.output = st.output;
                return out;
            }
            std::map<int, BitString> inner_sends;
            if (!st.halted && !st.waiting) {
                StepResult r = step_now();
                for (auto& [to, m] : r.sends) inner_sends[to] = m;
                out.notes = r.notes;
            }
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                auto it = inner_sends.find(j);
                out.sends.emplace_back(j, it == inner_sends.end() ? BitString("0") : BitString("1") + it->second);
                out.wait.push_back(j);
            }
            return out;
        };
    }
    return p;
}

// Every execution: each player runs exactly the same number t of local rounds, sends to and waits
// for every other player in rounds < t, and halts in round t.
inline bool is_proper_synchronous(const Protocol& p, int* tf_out = nullptr) {
    int tf = -1;
    bool ok = true;
    for (const auto& x : p.input_space) {
        for_each_path(p, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& r) {
            for (int i = 0; i < p.k && ok; ++i) {
                const auto& tr = r.trace[static_cast<std::size_t>(i)];
                int t = static_cast<int>(tr.size());
                if (tf < 0) tf = t;
                if (t != tf) ok = false;
                for (int l = 0; l + 1 < t && ok; ++l)
                    ok = tr[static_cast<std::size_t>(l)].send_to == others(p.k, i) &&
                         tr[static_cast<std::size_t>(l)].wait_for == others(p.k, i) && !tr[static_cast<std::size_t>(l)].halted;
                ok = ok && t > 0 && tr.back().halted;
            }
        });
        if (!ok) break;
    }
    if (tf_out) *tf_out = tf;
    return ok;
}

// ---------------------------------------------------------------------------------------------
// Direct-sum embedding: a protocol for n instances run on one real coordinate L.

namespace detail {

// Marginal of player i's component in a per-coordinate distribution, in first-occurrence order.
inline std::vector<std::pair<Value, Probability>> player_marginal(const InputDistribution& base, int i) {
    std::vector<std::pair<Value, Probability>> out;
    for (const auto& a : base.atoms()) {
        const Value& v = a.value.x.at(static_cast<std::size_t>(i));
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == v; });
        if (it == out.end()) out.emplace_back(v, a.p);
        else it->second += a.p;
    }
    return out;
}

} // namespace detail

inline Protocol embed_direct_sum(const Protocol& pi, const InputDistribution& base, int n) {
    const int k = pi.k;
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
    if (base.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty base distribution");
    std::vector<int> width(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) width[static_cast<std::size_t>(i)] = static_cast<int>(base.atoms()[0].value.x.at(static_cast<std::size_t>(i)).size());
    for (const auto& x : pi.input_space)
        for (int i = 0; i < k; ++i)
            if (static_cast<int>(x.at(static_cast<std::size_t>(i)).size()) != n * width[static_cast<std::size_t>(i)])
                throw Error(ErrorKind::IncompatibleArity, "inner input length is not n times the base width");
    for (const auto& a : base.atoms())
        for (int i = 0; i < k; ++i)
            if (static_cast<int>(a.value.x.at(static_cast<std::size_t>(i)).size()) != width[static_cast<std::size_t>(i)])
                throw Error(ErrorKind::IncompatibleArity, "base atoms differ in width");

    // Private sampling of X_i^{>L} coordinate-wise is only faithful for a product base.
    std::vector<std::vector<std::pair<Value, Probability>>> marg(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) marg[static_cast<std::size_t>(i)] = detail::player_marginal(base, i);
    for (const auto& a : base.atoms()) {
        Probability prod = 1;
        for (int i = 0; i < k; ++i)
            for (const auto& [v, pr] : marg[static_cast<std::size_t>(i)])
                if (v == a.value.x[static_cast<std::size_t>(i)]) prod *= pr;
        if (prod != a.p) throw Error(ErrorKind::InvalidArgument, "base distribution is not a product over players");
    }

    Protocol p = make_protocol_shell("embed_direct_sum(" + pi.name + "," + std::to_string(n) + ")", k);
    p.max_rounds = pi.max_rounds;
    for (const auto& a : base.atoms()) p.input_space.push_back(a.value.x);

    p.public_rand.push_back(RandomComponent::uniform("L", n));
    std::vector<InputTuple> base_atoms;
    RandomComponent lo;
    for (const auto& a : base.atoms()) {
        base_atoms.push_back(a.value.x);
        lo.probs.push_back(a.p);
    }
    for (int s = 1; s < n; ++s) {
        lo.name = "Xlo^" + std::to_string(s);
        p.public_rand.push_back(lo);
    }
    const int pub_off = n;
    p.public_rand.insert(p.public_rand.end(), pi.public_rand.begin(), pi.public_rand.end());

    std::vector<std::vector<Value>> hi_values(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        RandomComponent hi;
        for (const auto& [v, pr] : marg[static_cast<std::size_t>(i)]) {
            hi_values[static_cast<std::size_t>(i)].push_back(v);
            hi.probs.push_back(pr);
        }
        auto& space = p.private_rand[static_cast<std::size_t>(i)];
        for (int s = 1; s < n; ++s) {
            hi.name = "Xhi_" + std::to_string(i + 1) + "^" + std::to_string(s);
            space.push_back(hi);
        }
        space.insert(space.end(), pi.private_rand[static_cast<std::size_t>(i)].begin(), pi.private_rand[static_cast<std::size_t>(i)].end());
    }
    const int priv_off = n - 1;

    p.lineage = pi.lineage;
    p.lineage.push_back({pi.name,
                         "embed_direct_sum",
                         {{"n", std::to_string(n)}},
                         {"public[0]=L uniform on coordinates", "public[1..n-1]=coordinates below L",
                          "private_i[0..n-2]=player i coordinates above L"}});

    auto atoms = std::make_shared<std::vector<InputTuple>>(std::move(base_atoms));
    auto his = std::make_shared<std::vector<std::vector<Value>>>(std::move(hi_values));
    for (int i = 0; i < k; ++i) {
        auto inner = pi.programs[static_cast<std::size_t>(i)];
        p.programs[static_cast<std::size_t>(i)] = [inner, i, n, atoms, his, pub_off, priv_off](const View& v) {
            const int L = v.rand.pub(0);
            Value in;
            for (int d = 0; d < n; ++d) {
                const Value* part;
                if (d < L) part = &(*atoms)[static_cast<std::size_t>(v.rand.pub(1 + d))][static_cast<std::size_t>(i)];
                else if (d == L) part = &v.input;
                else part = &(*his)[static_cast<std::size_t>(i)][static_cast<std::size_t>(v.rand.priv(d - L - 1))];
                in.insert(in.end(), part->begin(), part->end());
            }
            View iv = v;
            iv.input = std::move(in);
            iv.rand = v.rand.shifted(priv_off, pub_off);
            StepResult r = inner(iv);
            if (r.output && !r.output->empty() && r.output->size() % static_cast<std::size_t>(n) == 0) {
                const std::size_t w = r.output->size() / static_cast<std::size_t>(n);
                Value chunk(r.output->begin() + static_cast<std::ptrdiff_t>(L * w),
                            r.output->begin() + static_cast<std::ptrdiff_t>((L + 1) * w));
                r.output = std::move(chunk);
            }
            return r;
        };
    }
    return p;
}

// ---------------------------------------------------------------------------------------------
// Reduction of Disj_k^n to AND_k. Players 0,1 deliver coordinates below L to players >= 2 by
// secret sharing; players 2,3 deliver coordinates above L to players 0,1 the same way. Then the
// inner protocol runs with the real input on coordinate L.

namespace detail {

struct ReduceLayout {
    int k = 0, n = 0;
    // Per player and per non-L slot s: component indices (-1 if absent).
    std::vector<std::vector<int>> M, X;
    std::vector<std::vector<std::vector<int>>> v, p, q; // [player][s][target j]
    std::vector<int> own_count;                          // reduction components per player

    int slots() const { return n - 1; }
};

inline ReduceLayout make_reduce_layout(Protocol& out, int k, int n) {
    ReduceLayout lay;
    lay.k = k;
    lay.n = n;
    const int S = n - 1;
    auto grid = [&](int fill) { return std::vector<std::vector<int>>(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(S), fill)); };
    lay.M = grid(-1);
    lay.X = grid(-1);
    auto cube = [&] {
        return std::vector<std::vector<std::vector<int>>>(
            static_cast<std::size_t>(k), std::vector<std::vector<int>>(static_cast<std::size_t>(S), std::vector<int>(static_cast<std::size_t>(k), -1)));
    };
    lay.v = cube();
    lay.p = cube();
    lay.q = cube();
    auto add = [&](int player, const std::string& name, RandomComponent c) {
        auto& space = out.private_rand[static_cast<std::size_t>(player)];
        c.name = name;
        space.push_back(std::move(c));
        return static_cast<int>(space.size()) - 1;
    };
    auto bit = [](const std::string&) { return RandomComponent::uniform("", 2); };
    for (int s = 0; s < S; ++s) {
        const std::string tag = "^" + std::to_string(s + 1);
        // Player 0: M, own sample, and shares to players >= 2.
        lay.M[0][static_cast<std::size_t>(s)] = add(0, "M" + tag, RandomComponent::bernoulli("", Probability(2, 3)));
        lay.X[0][static_cast<std::size_t>(s)] = add(0, "X" + tag, bit(""));
        for (int j = 2; j < k; ++j) {
            lay.v[0][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(0, "v_" + std::to_string(j + 1) + tag, bit(""));
            lay.p[0][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(0, "p_" + std::to_string(j + 1) + tag, bit(""));
        }
        lay.X[1][static_cast<std::size_t>(s)] = add(1, "X" + tag, bit(""));
        for (int j = 2; j < k; ++j)
            lay.q[1][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(1, "q_" + std::to_string(j + 1) + tag, bit(""));
        // Player 2: M, own sample, shares to players 0,1; player 3 holds the q shares.
        lay.M[2][static_cast<std::size_t>(s)] = add(2, "M" + tag, RandomComponent::bernoulli("", Probability(2, 3)));
        lay.X[2][static_cast<std::size_t>(s)] = add(2, "X" + tag, bit(""));
        for (int j = 0; j < 2; ++j) {
            lay.v[2][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(2, "v_" + std::to_string(j + 1) + tag, bit(""));
            lay.p[2][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(2, "p_" + std::to_string(j + 1) + tag, bit(""));
        }
        lay.X[3][static_cast<std::size_t>(s)] = add(3, "X" + tag, bit(""));
        for (int j = 0; j < 2; ++j)
            lay.q[3][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = add(3, "q_" + std::to_string(j + 1) + tag, bit(""));
        for (int i = 4; i < k; ++i) lay.X[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = add(i, "X" + tag, bit(""));
    }
    for (int i = 0; i < k; ++i) lay.own_count.push_back(static_cast<int>(out.private_rand[static_cast<std::size_t>(i)].size()));
    return lay;
}

// Setup messages sent from a to b: round index 0 and 1 of the reduction.
inline int reduce_setup_count(int a, int b, int lo, int hi) {
    int c = 0;
    if (lo > 0) {
        if (a == 0 && b >= 1) ++c;    // M||v to 1, p shares to >= 2
        if (a == 1 && b >= 2) ++c;    // q shares
    }
    if (hi > 0) {
        if (a == 2 && b != 2) ++c;    // M (and v for 3) to >= 3, p shares to 0,1
        if (a == 3 && b <= 1) ++c;    // q shares
    }
    return c;
}

} // namespace detail

inline Protocol reduce_disj_to_and(const Protocol& pi, int n) {
    const int k = pi.k;
    if (k <= 3) throw Error(ErrorKind::ArityTooSmall, "reduction needs k > 3");
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
    for (const auto& x : pi.input_space)
        for (const auto& xi : x)
            if (static_cast<int>(xi.size()) != n) throw Error(ErrorKind::IncompatibleArity, "inner inputs are not n-bit vectors");

    Protocol p = make_protocol_shell("reduce_disj_to_and(" + pi.name + "," + std::to_string(n) + ")", k);
    p.input_space = boolean_cube(k, 1);
    p.max_rounds = pi.max_rounds + 2;
    p.public_rand.push_back(RandomComponent::uniform("L", n));
    for (int s = 1; s < n; ++s) p.public_rand.push_back(RandomComponent::uniform("Z^" + std::to_string(s), k));
    const int pub_off = n;
    p.public_rand.insert(p.public_rand.end(), pi.public_rand.begin(), pi.public_rand.end());
    auto lay = std::make_shared<detail::ReduceLayout>(detail::make_reduce_layout(p, k, n));
    for (int i = 0; i < k; ++i)
        p.private_rand[static_cast<std::size_t>(i)].insert(p.private_rand[static_cast<std::size_t>(i)].end(),
                                                           pi.private_rand[static_cast<std::size_t>(i)].begin(),
                                                           pi.private_rand[static_cast<std::size_t>(i)].end());
    p.lineage = pi.lineage;
    p.lineage.push_back({pi.name,
                         "reduce_disj_to_and",
                         {{"n", std::to_string(n)}, {"k", std::to_string(k)}},
                         {"public[0]=L", "public[s]=Z of the s-th coordinate other than L",
                          "private: M, own X samples, and p/q/v share bits per coordinate"}});

    for (int i = 0; i < k; ++i) {
        auto inner = pi.programs[static_cast<std::size_t>(i)];
        p.programs[static_cast<std::size_t>(i)] = [inner, i, k, n, lay, pub_off](const View& v) -> StepResult {
            const auto ui = static_cast<std::size_t>(i);
            const int L = v.rand.pub(0);
            const int lo = L, hi = n - 1 - L; // slots s < L are coordinates below L
            auto Z = [&](int s) { return v.rand.pub(1 + s); };
            auto priv = [&](int c) { return v.rand.priv(c); };
            auto su = [](int s) { return static_cast<std::size_t>(s); };

            // M bits of a side, known to the dealer directly and to others from the first message.
            auto M_lo = [&](int s) -> int {
                if (i == 0) return priv(lay->M[0][su(s)]);
                return v.read[0].at(0).bit(static_cast<std::size_t>(s * (k - 1)));
            };
            auto M_hi = [&](int s) -> int { // s indexes slots >= L
                const int h = s - L;
                if (i == 2) return priv(lay->M[2][su(s)]);
                const int width = i == 3 ? 3 : 1;
                return v.read[2].at(0).bit(static_cast<std::size_t>(h * width));
            };
            auto own_sample = [&](int s, int m) -> int {
                if (Z(s) == i) return 0;
                if (m == 1) return 1;
                return priv(lay->X[ui][su(s)]);
            };
            // Dealer d's shares (p, v) for target j on slot s given M.
            auto dealer = [&](int d, int s, int j, int m) -> std::pair<int, int> {
                const int vb = priv(lay->v[static_cast<std::size_t>(d)][su(s)][static_cast<std::size_t>(j)]);
                if (Z(s) == j || m == 1) return {vb, vb};
                return {priv(lay->p[static_cast<std::size_t>(d)][su(s)][static_cast<std::size_t>(j)]), vb};
            };
            auto helper = [&](int h, int s, int j, int m, int vb) -> int {
                if (Z(s) == j) return vb;
                if (m == 1) return vb ^ 1;
                return priv(lay->q[static_cast<std::size_t>(h)][su(s)][static_cast<std::size_t>(j)]);
            };

            StepResult r;
            if (v.round == 0) {
                if (i == 0 && lo > 0) {
                    BitString to1;
                    std::vector<BitString> shares(static_cast<std::size_t>(k));
                    for (int s = 0; s < lo; ++s) {
                        const int m = priv(lay->M[0][su(s)]);
                        to1.push_back(m);
                        for (int j = 2; j < k; ++j) {
                            auto [pb, vb] = dealer(0, s, j, m);
                            to1.push_back(vb);
                            shares[static_cast<std::size_t>(j)].push_back(pb);
                        }
                    }
                    r.send(1, to1);
                    for (int j = 2; j < k; ++j) r.send(j, shares[static_cast<std::size_t>(j)]);
                }
                if (i == 2 && hi > 0) {
                    BitString p0, p1, to3, mbits;
                    for (int s = L; s < n - 1; ++s) {
                        const int m = priv(lay->M[2][su(s)]);
                        auto [a0, v0] = dealer(2, s, 0, m);
                        auto [a1, v1] = dealer(2, s, 1, m);
                        p0.push_back(a0);
                        p1.push_back(a1);
                        to3.push_back(m);
                        to3.push_back(v0);
                        to3.push_back(v1);
                        mbits.push_back(m);
                    }
                    r.send(0, p0).send(1, p1).send(3, to3);
                    for (int j = 4; j < k; ++j) r.send(j, mbits);
                }
                if (i == 0) { if (hi > 0) r.wait = {2}; }
                else if (i == 1) {
                    if (lo > 0) r.wait.push_back(0);
                    if (hi > 0) r.wait.push_back(2);
                } else if (i == 2) { if (lo > 0) r.wait = {0}; }
                else {
                    if (lo > 0) r.wait.push_back(0);
                    if (hi > 0) r.wait.push_back(2);
                }
                return r;
            }
            if (v.round == 1) {
                if (i == 1 && lo > 0) {
                    std::vector<BitString> shares(static_cast<std::size_t>(k));
                    const BitString& msg = v.read[0].at(0);
                    for (int s = 0; s < lo; ++s) {
                        const int m = msg.bit(static_cast<std::size_t>(s * (k - 1)));
                        for (int j = 2; j < k; ++j) {
                            const int vb = msg.bit(static_cast<std::size_t>(s * (k - 1) + (j - 1)));
                            shares[static_cast<std::size_t>(j)].push_back(helper(1, s, j, m, vb));
                        }
                    }
                    for (int j = 2; j < k; ++j) r.send(j, shares[static_cast<std::size_t>(j)]);
                }
                if (i == 3 && hi > 0) {
                    BitString q0, q1;
                    const BitString& msg = v.read[2].at(0);
                    for (int s = L; s < n - 1; ++s) {
                        const std::size_t h = static_cast<std::size_t>(s - L) * 3;
                        const int m = msg.bit(h);
                        q0.push_back(helper(3, s, 0, m, msg.bit(h + 1)));
                        q1.push_back(helper(3, s, 1, m, msg.bit(h + 2)));
                    }
                    r.send(0, q0).send(1, q1);
                }
                if (i >= 2 && lo > 0) r.wait.push_back(1);
                if (i <= 1 && hi > 0) r.wait.push_back(3);
                return r;
            }

            // Assemble the inner input.
            Value in(static_cast<std::size_t>(n), 0);
            std::string mlo, mhi;
            for (int s = 0; s < n - 1; ++s) {
                const int t = s < L ? s : s + 1;
                int bitv;
                if (s < L) {
                    if (i <= 1) bitv = own_sample(s, M_lo(s));
                    else bitv = v.read[0].at(0).bit(static_cast<std::size_t>(s)) ^ v.read[1].at(0).bit(static_cast<std::size_t>(s));
                    if (i == 0) mlo += std::to_string(M_lo(s));
                } else {
                    const std::size_t h = static_cast<std::size_t>(s - L);
                    if (i >= 2) bitv = own_sample(s, M_hi(s));
                    else bitv = v.read[2].at(0).bit(h) ^ v.read[3].at(0).bit(h);
                    if (i == 2) mhi += std::to_string(M_hi(s));
                }
                in[static_cast<std::size_t>(t)] = bitv;
            }
            in[static_cast<std::size_t>(L)] = v.input.at(0);

            View iv;
            iv.player = i;
            iv.k = k;
            iv.input = in;
            iv.rand = v.rand.shifted(lay->own_count[ui], pub_off);
            iv.round = v.round - 2;
            iv.read.assign(static_cast<std::size_t>(k), {});
            iv.sent.assign(static_cast<std::size_t>(k), {});
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                const auto uj = static_cast<std::size_t>(j);
                const auto skip_in = static_cast<std::ptrdiff_t>(detail::reduce_setup_count(j, i, lo, hi));
                const auto skip_out = static_cast<std::ptrdiff_t>(detail::reduce_setup_count(i, j, lo, hi));
                iv.read[uj].assign(v.read[uj].begin() + skip_in, v.read[uj].end());
                iv.sent[uj].assign(v.sent[uj].begin() + skip_out, v.sent[uj].end());
            }
            r = inner(iv);
            if (v.round == 2) {
                r.notes.emplace_back("x", value_key(in));
                if (i == 0) r.notes.emplace_back("M_lo", mlo);
                if (i == 2) r.notes.emplace_back("M_hi", mhi);
            }
            return r;
        };
    }
    return p;
}

} // namespace p2pic
