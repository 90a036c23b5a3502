#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bits.hpp"
#include "error.hpp"
#include "rational.hpp"

namespace p2pic {

// Input and output values are small integer tuples; a bit vector of length n is n entries in {0,1}.
using Value = std::vector<int>;
using InputTuple = std::vector<Value>;

inline std::string value_key(const Value& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(v[i]);
    }
    return s;
}

inline std::string input_key(const InputTuple& x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s.push_back('|');
        s += value_key(x[i]);
    }
    return s;
}

// One independent finite random source; atoms are 0..probs.size()-1.
struct RandomComponent {
    std::string name;
    std::vector<Probability> probs;

    static RandomComponent uniform(std::string name, int atoms) {
        return {std::move(name), std::vector<Probability>(static_cast<std::size_t>(atoms), Probability(1, atoms))};
    }
    static RandomComponent bernoulli(std::string name, Probability p0) { return {std::move(name), {p0, 1 - p0}}; }
};

using RandomSpace = std::vector<RandomComponent>;

inline void validate_space(const RandomSpace& space, const std::string& owner) {
    for (const auto& c : space) {
        if (c.probs.empty()) throw Error(ErrorKind::InvalidProtocol, owner + " component " + c.name + " has no atoms");
        Probability total = 0;
        for (const auto& p : c.probs) {
            if (p <= 0) throw Error(ErrorKind::InvalidProtocol, owner + " component " + c.name + " has non-positive atom");
            total += p;
        }
        if (total != 1) throw Error(ErrorKind::InvalidProtocol, owner + " component " + c.name + " does not sum to 1");
    }
}

// Atom index per component; -1 marks a component not fixed yet.
struct RandomAssignment {
    std::vector<std::vector<int>> priv;
    std::vector<int> pub;
};

struct UnassignedComponent {
    bool is_public;
    int player;
    int component;
};

// Handle a local program uses to read its randomness. Offsets let wrapper protocols expose a slice.
struct RandomAccess {
    const RandomAssignment* assignment = nullptr;
    int player = 0;
    int priv_offset = 0;
    int pub_offset = 0;

    int priv(int c) const {
        int idx = c + priv_offset;
        const auto& row = assignment->priv.at(static_cast<std::size_t>(player));
        if (idx < 0 || idx >= static_cast<int>(row.size()))
            throw Error(ErrorKind::InvalidProtocol, "private component index out of range");
        int v = row[static_cast<std::size_t>(idx)];
        if (v < 0) throw UnassignedComponent{false, player, idx};
        return v;
    }

    int pub(int c) const {
        int idx = c + pub_offset;
        if (idx < 0 || idx >= static_cast<int>(assignment->pub.size()))
            throw Error(ErrorKind::InvalidProtocol, "public component index out of range");
        int v = assignment->pub[static_cast<std::size_t>(idx)];
        if (v < 0) throw UnassignedComponent{true, -1, idx};
        return v;
    }

    RandomAccess shifted(int dpriv, int dpub) const {
        RandomAccess r = *this;
        r.priv_offset += dpriv;
        r.pub_offset += dpub;
        return r;
    }
};

using LinkLog = std::vector<std::vector<BitString>>; // indexed by the other player

struct View {
    int player = 0;
    int k = 0;
    Value input;
    RandomAccess rand;
    LinkLog read; // read[j]: messages read from j, in order
    LinkLog sent; // sent[j]: messages sent to j, in order
    int round = 0; // completed local rounds
};

struct StepResult {
    std::vector<std::pair<int, BitString>> sends; // ascending receiver
    std::optional<Value> output;
    std::vector<int> wait; // ascending
    std::vector<std::pair<std::string, std::string>> notes;

    bool operator==(const StepResult&) const = default;

    StepResult& send(int to, BitString m) {
        sends.emplace_back(to, std::move(m));
        return *this;
    }
};

using LocalProgram = std::function<StepResult(const View&)>;

struct TransformRecord {
    std::string source;
    std::string transform;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::string> randomness; // which components realize which sampled quantity
};

struct Protocol {
    std::string name;
    int k = 0;
    std::vector<LocalProgram> programs;
    std::vector<InputTuple> input_space;
    std::vector<RandomSpace> private_rand;
    RandomSpace public_rand;
    int max_rounds = 0;
    std::vector<TransformRecord> lineage;

    bool has_private_coins() const {
        return std::any_of(private_rand.begin(), private_rand.end(), [](const RandomSpace& s) { return !s.empty(); });
    }
    bool has_public_coins() const { return !public_rand.empty(); }

    RandomAssignment empty_assignment() const {
        RandomAssignment a;
        for (const auto& s : private_rand) a.priv.emplace_back(s.size(), -1);
        a.pub.assign(public_rand.size(), -1);
        return a;
    }
};

inline int default_max_rounds(int k) { return 4 * k + 8; }

inline Protocol make_protocol_shell(std::string name, int k) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 players");
    Protocol p;
    p.name = std::move(name);
    p.k = k;
    p.programs.resize(static_cast<std::size_t>(k));
    p.private_rand.resize(static_cast<std::size_t>(k));
    p.max_rounds = default_max_rounds(k);
    return p;
}

struct Transcript {
    int k = 0;
    std::vector<LinkLog> read; // read[i][j]: messages i read from j
    std::vector<LinkLog> sent; // sent[i][j]: messages i sent to j

    static Transcript empty(int k) {
        Transcript t;
        t.k = k;
        t.read.assign(static_cast<std::size_t>(k), LinkLog(static_cast<std::size_t>(k)));
        t.sent.assign(static_cast<std::size_t>(k), LinkLog(static_cast<std::size_t>(k)));
        return t;
    }

    static std::string seq_key(const std::vector<BitString>& msgs) {
        std::string s;
        for (std::size_t m = 0; m < msgs.size(); ++m) {
            if (m) s.push_back(',');
            s += msgs[m].str();
        }
        return s;
    }

    // Incoming part of player i's transcript.
    std::string incoming_key(int i) const {
        std::string s;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            s += seq_key(read[i][j]);
            s.push_back(';');
        }
        return s;
    }

    // Pi_i: read and sent sequences on every link of player i.
    std::string player_key(int i) const {
        std::string s;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            s += seq_key(read[i][j]);
            s.push_back('/');
            s += seq_key(sent[i][j]);
            s.push_back(';');
        }
        return s;
    }

    std::string key() const {
        std::string s;
        for (int i = 0; i < k; ++i) {
            s += player_key(i);
            s.push_back('#');
        }
        return s;
    }

    std::size_t bits_sent() const {
        std::size_t total = 0;
        for (const auto& row : sent)
            for (const auto& link : row)
                for (const auto& m : link) total += m.size();
        return total;
    }

    std::size_t player_bits(int i) const {
        std::size_t total = 0;
        for (int j = 0; j < k; ++j) {
            for (const auto& m : read[i][j]) total += m.size();
            for (const auto& m : sent[i][j]) total += m.size();
        }
        return total;
    }

    bool operator==(const Transcript&) const = default;
};

// Target function. Each designated player should output f(player, x).
struct FunctionSpec {
    std::string name;
    int k = 0;
    std::vector<int> designated;
    std::function<Value(int, const InputTuple&)> f;
    int instances = 1; // >1: output is split into equal chunks, each judged separately

    Value value(const InputTuple& x) const { return f(designated.empty() ? 0 : designated.front(), x); }
};

inline FunctionSpec fn_and(int k, std::vector<int> designated = {0}) {
    return {"AND_" + std::to_string(k), k, std::move(designated), [](int, const InputTuple& x) {
                int r = 1;
                for (const auto& xi : x) r &= xi.at(0);
                return Value{r};
            }};
}

inline FunctionSpec fn_parity(int k, int n, std::vector<int> designated = {0}) {
    return {"Par_" + std::to_string(k) + "^" + std::to_string(n), k, std::move(designated),
            [n](int, const InputTuple& x) {
                Value out(static_cast<std::size_t>(n), 0);
                for (const auto& xi : x)
                    for (int l = 0; l < n; ++l) out[static_cast<std::size_t>(l)] ^= xi.at(static_cast<std::size_t>(l));
                return out;
            },
            n};
}

inline FunctionSpec fn_disj(int k, int n, std::vector<int> designated = {0}) {
    return {"Disj_" + std::to_string(k) + "^" + std::to_string(n), k, std::move(designated),
            [n](int, const InputTuple& x) {
                int any = 0;
                for (int l = 0; l < n; ++l) {
                    int all = 1;
                    for (const auto& xi : x) all &= xi.at(static_cast<std::size_t>(l));
                    any |= all;
                }
                return Value{any};
            }};
}

inline FunctionSpec fn_constant(int k, Value c, std::vector<int> designated = {0}) {
    return {"const", k, std::move(designated), [c](int, const InputTuple&) { return c; }};
}

// Player i's input is (b_i, pred_i, succ_i); player i must output b of its successor.
inline FunctionSpec fn_permutation(int k) {
    std::vector<int> all(static_cast<std::size_t>(k));
    std::iota(all.begin(), all.end(), 0);
    return {"permutation_" + std::to_string(k), k, all, [](int i, const InputTuple& x) {
                int succ = x.at(static_cast<std::size_t>(i)).at(2);
                return Value{x.at(static_cast<std::size_t>(succ)).at(0)};
            }};
}

// All tuples over {0,1}^n per player.
inline std::vector<InputTuple> boolean_cube(int k, int n) {
    std::vector<InputTuple> out;
    const long long total = 1LL << (k * n);
    out.reserve(static_cast<std::size_t>(total));
    for (long long code = 0; code < total; ++code) {
        InputTuple x(static_cast<std::size_t>(k), Value(static_cast<std::size_t>(n)));
        for (int i = 0; i < k; ++i)
            for (int l = 0; l < n; ++l)
                x[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] =
                    static_cast<int>((code >> (i * n + l)) & 1);
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace p2pic
