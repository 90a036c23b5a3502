#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace p2pic {

// Chooses among enabled actions. Eager always takes the first in canonical order.
class Schedule {
public:
    static Schedule eager() { return Schedule(); }
    static Schedule random(std::uint64_t seed) {
        Schedule s;
        s.random_ = true;
        s.rng_.seed(seed);
        return s;
    }

    std::size_t pick(std::size_t n) {
        if (!random_ || n <= 1) return 0;
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
    }

    bool is_random() const noexcept { return random_; }

private:
    bool random_ = false;
    std::mt19937_64 rng_;
};

struct RoundTrace {
    std::vector<int> send_to;
    std::vector<int> wait_for;
    bool halted = false;
};

struct ReadEvent {
    int round; // local round (0-based) whose wait phase performed the read
    int from;
    BitString msg;
};

struct ExecutionResult {
    Transcript transcript;
    std::vector<std::optional<Value>> outputs;
    std::vector<int> rounds; // local rounds executed, the halting one included
    std::vector<std::vector<RoundTrace>> trace;
    std::vector<std::vector<ReadEvent>> reads;
    std::vector<std::map<std::string, std::string>> notes;
};

struct ExecuteOptions {
    bool check_determinism = false;
};

namespace detail {

inline void check_step(const StepResult& r, int player, int k) {
    int prev = -1;
    for (const auto& [to, msg] : r.sends) {
        if (to < 0 || to >= k) throw Error(ErrorKind::InvalidProtocol, "send to out-of-range player");
        if (to == player) throw Error(ErrorKind::InvalidProtocol, "player " + std::to_string(player + 1) + " sends to itself");
        if (to <= prev) throw Error(ErrorKind::InvalidProtocol, "send set not strictly ascending");
        if (msg.empty()) throw Error(ErrorKind::InvalidProtocol, "empty message payload");
        prev = to;
    }
    if (r.output) return;
    prev = -1;
    for (int j : r.wait) {
        if (j < 0 || j >= k) throw Error(ErrorKind::InvalidProtocol, "wait for out-of-range player");
        if (j == player) throw Error(ErrorKind::InvalidProtocol, "player " + std::to_string(player + 1) + " waits for itself");
        if (j <= prev) throw Error(ErrorKind::InvalidProtocol, "wait set not strictly ascending");
        prev = j;
    }
}

} // namespace detail

// Runs all local programs to halt under the given schedule. Propagates UnassignedComponent
// so a caller can enumerate randomness lazily.
inline ExecutionResult execute(const Protocol& p, const InputTuple& x, const RandomAssignment& r, Schedule& schedule,
                               const ExecuteOptions& opts = {}) {
    const int k = p.k;
    if (static_cast<int>(x.size()) != k) throw Error(ErrorKind::InvalidArgument, "input tuple has wrong arity");
    enum class State { Ready, Waiting, Halted };

    ExecutionResult res;
    res.transcript = Transcript::empty(k);
    res.outputs.assign(static_cast<std::size_t>(k), std::nullopt);
    res.rounds.assign(static_cast<std::size_t>(k), 0);
    res.trace.assign(static_cast<std::size_t>(k), {});
    res.reads.assign(static_cast<std::size_t>(k), {});
    res.notes.assign(static_cast<std::size_t>(k), {});

    std::vector<State> state(static_cast<std::size_t>(k), State::Ready);
    std::vector<std::vector<int>> waiting(static_cast<std::size_t>(k));
    // inflight[i][j]: sent by i to j, not yet delivered; buffer[j][i]: delivered to j, unread.
    std::vector<std::vector<std::deque<BitString>>> inflight(static_cast<std::size_t>(k),
                                                              std::vector<std::deque<BitString>>(static_cast<std::size_t>(k)));
    auto buffer = inflight;
    int halted = 0;

    enum class Kind { Complete, Step, Deliver };
    struct Action {
        Kind kind;
        int a, b;
    };
    std::vector<Action> enabled;

    auto step = [&](int i) {
        auto ui = static_cast<std::size_t>(i);
        int round = res.rounds[ui];
        if (round >= p.max_rounds)
            throw Error(ErrorKind::RoundBoundExceeded,
                        "player " + std::to_string(i + 1) + " exceeds " + std::to_string(p.max_rounds) + " local rounds");
        View v;
        v.player = i;
        v.k = k;
        v.input = x[ui];
        v.rand = RandomAccess{&r, i, 0, 0};
        v.read = res.transcript.read[ui];
        v.sent = res.transcript.sent[ui];
        v.round = round;
        StepResult out = p.programs[ui](v);
        if (opts.check_determinism && !(p.programs[ui](v) == out))
            throw Error(ErrorKind::InvalidProtocol, "player " + std::to_string(i + 1) + " step is not deterministic");
        detail::check_step(out, i, k);
        RoundTrace tr;
        for (auto& [to, msg] : out.sends) {
            tr.send_to.push_back(to);
            res.transcript.sent[ui][static_cast<std::size_t>(to)].push_back(msg);
            inflight[ui][static_cast<std::size_t>(to)].push_back(std::move(msg));
        }
        for (auto& [key, val] : out.notes) res.notes[ui][key] = val;
        res.rounds[ui] = round + 1;
        if (out.output) {
            res.outputs[ui] = std::move(out.output);
            state[ui] = State::Halted;
            tr.halted = true;
            ++halted;
        } else {
            tr.wait_for = out.wait;
            waiting[ui] = std::move(out.wait);
            state[ui] = State::Waiting;
        }
        res.trace[ui].push_back(std::move(tr));
    };

    while (halted < k) {
        enabled.clear();
        for (int i = 0; i < k; ++i) {
            auto ui = static_cast<std::size_t>(i);
            if (state[ui] != State::Waiting) continue;
            bool ok = true;
            for (int j : waiting[ui]) ok = ok && !buffer[ui][static_cast<std::size_t>(j)].empty();
            if (ok) enabled.push_back({Kind::Complete, i, 0});
        }
        for (int i = 0; i < k; ++i)
            if (state[static_cast<std::size_t>(i)] == State::Ready) enabled.push_back({Kind::Step, i, 0});
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (!inflight[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].empty())
                    enabled.push_back({Kind::Deliver, i, j});
        if (enabled.empty()) {
            std::string who;
            for (int i = 0; i < k; ++i)
                if (state[static_cast<std::size_t>(i)] == State::Waiting) who += " " + std::to_string(i + 1);
            throw Error(ErrorKind::Deadlock, "players waiting with no message in flight:" + who);
        }
        const Action act = enabled[schedule.pick(enabled.size())];
        auto ua = static_cast<std::size_t>(act.a);
        switch (act.kind) {
        case Kind::Step: step(act.a); break;
        case Kind::Complete: {
            for (int j : waiting[ua]) {
                auto& q = buffer[ua][static_cast<std::size_t>(j)];
                res.reads[ua].push_back({res.rounds[ua] - 1, j, q.front()});
                res.transcript.read[ua][static_cast<std::size_t>(j)].push_back(std::move(q.front()));
                q.pop_front();
            }
            waiting[ua].clear();
            state[ua] = State::Ready;
            break;
        }
        case Kind::Deliver: {
            auto& q = inflight[ua][static_cast<std::size_t>(act.b)];
            buffer[static_cast<std::size_t>(act.b)][ua].push_back(std::move(q.front()));
            q.pop_front();
            break;
        }
        }
    }
    return res;
}

inline ExecutionResult execute(const Protocol& p, const InputTuple& x, const RandomAssignment& r) {
    Schedule s = Schedule::eager();
    return execute(p, x, r, s);
}

// Fully fixed randomness assignment from a flat list of atom indices (private per player, then public).
inline RandomAssignment full_assignment(const Protocol& p, const std::vector<std::vector<int>>& priv,
                                        const std::vector<int>& pub) {
    RandomAssignment a = p.empty_assignment();
    for (std::size_t i = 0; i < priv.size() && i < a.priv.size(); ++i)
        for (std::size_t c = 0; c < priv[i].size() && c < a.priv[i].size(); ++c) a.priv[i][c] = priv[i][c];
    for (std::size_t c = 0; c < pub.size() && c < a.pub.size(); ++c) a.pub[c] = pub[c];
    return a;
}

struct PathOptions {
    std::size_t cap = 10000000;
    ExecuteOptions exec;
    std::function<void(const Error&, const RandomAssignment&)> on_error; // absent: rethrow
    std::optional<RandomAssignment> root;                                  // start from these fixed components
};

// Depth-first enumeration of the randomness that run(assignment) actually reads. run may throw
// UnassignedComponent; the DFS then branches on that component and retries. Components never read
// stay at -1: they are marginalized, and prob already covers them.
template <class Run, class Visit>
void lazy_enumerate(const Protocol& p, Run&& run, Visit&& visit, const PathOptions& opts = {}) {
    struct Node {
        RandomAssignment a;
        Probability prob;
    };
    std::vector<Node> stack;
    if (opts.root) {
        Probability pr = 1;
        for (std::size_t c = 0; c < opts.root->pub.size(); ++c)
            if (opts.root->pub[c] >= 0) pr *= p.public_rand[c].probs.at(static_cast<std::size_t>(opts.root->pub[c]));
        for (std::size_t i = 0; i < opts.root->priv.size(); ++i)
            for (std::size_t c = 0; c < opts.root->priv[i].size(); ++c)
                if (opts.root->priv[i][c] >= 0) pr *= p.private_rand[i][c].probs.at(static_cast<std::size_t>(opts.root->priv[i][c]));
        stack.push_back({*opts.root, pr});
    } else {
        stack.push_back({p.empty_assignment(), Probability(1)});
    }
    std::size_t paths = 0;
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        std::optional<decltype(run(node.a))> res;
        std::optional<UnassignedComponent> need;
        try {
            res.emplace(run(node.a));
        } catch (const UnassignedComponent& u) {
            need = u;
        } catch (const Error& e) {
            if (!opts.on_error) throw;
            opts.on_error(e, node.a);
            continue;
        }
        if (need) {
            const RandomComponent& comp =
                need->is_public ? p.public_rand[static_cast<std::size_t>(need->component)]
                                : p.private_rand[static_cast<std::size_t>(need->player)][static_cast<std::size_t>(need->component)];
            for (int atom = static_cast<int>(comp.probs.size()) - 1; atom >= 0; --atom) {
                Node child{node.a, node.prob * comp.probs[static_cast<std::size_t>(atom)]};
                if (need->is_public) child.a.pub[static_cast<std::size_t>(need->component)] = atom;
                else child.a.priv[static_cast<std::size_t>(need->player)][static_cast<std::size_t>(need->component)] = atom;
                stack.push_back(std::move(child));
            }
            continue;
        }
        if (++paths > opts.cap)
            throw Error(ErrorKind::SupportTooLarge, "randomness enumeration exceeds cap " + std::to_string(opts.cap));
        visit(node.a, node.prob, *res);
    }
}

template <class F>
void for_each_path(const Protocol& p, const InputTuple& x, F&& visit, const PathOptions& opts = {}) {
    lazy_enumerate(
        p,
        [&](const RandomAssignment& a) {
            Schedule s = Schedule::eager();
            return execute(p, x, a, s, opts.exec);
        },
        visit, opts);
}

inline std::size_t communication_cost(const Protocol& p) {
    std::size_t best = 0;
    for (const auto& x : p.input_space)
        for_each_path(p, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& r) {
            best = std::max(best, r.transcript.bits_sent());
        });
    return best;
}

// Largest local-round count over all inputs and randomness.
inline int max_local_rounds(const Protocol& p) {
    int best = 0;
    for (const auto& x : p.input_space)
        for_each_path(p, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& r) {
            for (int c : r.rounds) best = std::max(best, c);
        });
    return best;
}

struct Violation {
    std::string kind;
    std::string detail;
};

struct ValidationReport {
    bool valid = true;
    std::vector<Violation> violations;
    std::size_t executions = 0;
};

inline ValidationReport validate_protocol(const Protocol& p) {
    ValidationReport rep;
    auto add = [&](std::string kind, std::string detail) {
        rep.valid = false;
        if (rep.violations.size() < 64) rep.violations.push_back({std::move(kind), std::move(detail)});
    };
    try {
        for (const auto& s : p.private_rand) validate_space(s, "private");
        validate_space(p.public_rand, "public");
    } catch (const Error& e) {
        add(to_string(e.kind()), e.what());
        return rep;
    }
    if (static_cast<int>(p.programs.size()) != p.k) {
        add("InvalidProtocol", "program count differs from k");
        return rep;
    }
    // (receiver, round, sender) -> possible messages
    std::map<std::tuple<int, int, int>, std::set<std::string>> contexts;
    PathOptions opts;
    opts.exec.check_determinism = true;
    for (const auto& x : p.input_space) {
        opts.on_error = [&](const Error& e, const RandomAssignment&) {
            add(to_string(e.kind()), std::string(e.what()) + " on input " + input_key(x));
        };
        try {
            for_each_path(p, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& r) {
                ++rep.executions;
                for (int i = 0; i < p.k; ++i)
                    for (const auto& ev : r.reads[static_cast<std::size_t>(i)])
                        contexts[{i, ev.round, ev.from}].insert(ev.msg.str());
            }, opts);
        } catch (const Error& e) {
            add(to_string(e.kind()), e.what());
        }
    }
    for (const auto& [ctx, msgs] : contexts) {
        // In sorted order a prefix is always immediately followed by an extension of it.
        const std::string* prev = nullptr;
        for (const auto& m : msgs) {
            if (prev && m.compare(0, prev->size(), *prev) == 0) {
                add("PrefixViolation", "player " + std::to_string(std::get<0>(ctx) + 1) + " round " +
                                           std::to_string(std::get<1>(ctx) + 1) + " from player " +
                                           std::to_string(std::get<2>(ctx) + 1) + ": '" + *prev + "' is a prefix of '" + m + "'");
            }
            prev = &m;
        }
    }
    return rep;
}

} // namespace p2pic
