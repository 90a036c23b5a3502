#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace p2pic {

inline BitString to_bits(const Value& v) {
    BitString b;
    for (int x : v) b.push_back(x);
    return b;
}

inline Value to_value(const BitString& b) {
    Value v;
    for (std::size_t i = 0; i < b.size(); ++i) v.push_back(b.bit(i));
    return v;
}

inline std::vector<int> others(int k, int i) {
    std::vector<int> v;
    for (int j = 0; j < k; ++j)
        if (j != i) v.push_back(j);
    return v;
}

namespace detail {

// Players 1..k-1 send their bits to player 0 and halt; player 0 combines once all have arrived.
// With announce, player 0 also sends its one-bit output to player 1 as it halts.
inline Protocol star(std::string name, int k, int n, std::function<Value(const std::vector<Value>&)> combine,
                     bool announce = false) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
    Protocol p = make_protocol_shell(std::move(name), k);
    p.input_space = boolean_cube(k, n);
    p.programs[0] = [k, combine, announce](const View& v) {
        StepResult r;
        if (v.round == 0) {
            r.wait = others(k, 0);
            return r;
        }
        std::vector<Value> all{v.input};
        for (int j = 1; j < k; ++j) all.push_back(to_value(v.read[static_cast<std::size_t>(j)].at(0)));
        r.output = combine(all);
        if (announce) r.send(1, to_bits(*r.output));
        return r;
    };
    for (int i = 1; i < k; ++i)
        p.programs[static_cast<std::size_t>(i)] = [](const View& v) {
            StepResult r;
            r.send(0, to_bits(v.input));
            r.output = Value{};
            return r;
        };
    return p;
}

} // namespace detail

inline Protocol make_star_parity(int k, int n) {
    auto p = detail::star("star_parity(" + std::to_string(k) + "," + std::to_string(n) + ")", k, n,
                          [n](const std::vector<Value>& all) {
                              Value out(static_cast<std::size_t>(n), 0);
                              for (const auto& x : all)
                                  for (int l = 0; l < n; ++l) out[static_cast<std::size_t>(l)] ^= x[static_cast<std::size_t>(l)];
                              return out;
                          });
    return p;
}

inline Protocol make_star_disj(int k, int n) {
    return detail::star("star_disj(" + std::to_string(k) + "," + std::to_string(n) + ")", k, n,
                        [n](const std::vector<Value>& all) {
                            int any = 0;
                            for (int l = 0; l < n; ++l) {
                                int a = 1;
                                for (const auto& x : all) a &= x[static_cast<std::size_t>(l)];
                                any |= a;
                            }
                            return Value{any};
                        },
                        true);
}

inline Protocol make_star_and(int k) {
    Protocol p = make_star_disj(k, 1);
    p.name = "star_and(" + std::to_string(k) + ")";
    return p;
}

// Input for player i: (b_i, pred_i, succ_i) along the cycle order[0] -> order[1] -> ... -> order[0].
inline InputTuple make_permutation_input(const std::vector<int>& bits, const std::vector<int>& order) {
    const int k = static_cast<int>(bits.size());
    if (static_cast<int>(order.size()) != k) throw Error(ErrorKind::PromiseViolation, "cycle length differs from k");
    std::vector<int> seen(static_cast<std::size_t>(k), 0);
    for (int v : order) {
        if (v < 0 || v >= k || seen[static_cast<std::size_t>(v)]++) throw Error(ErrorKind::PromiseViolation, "order is not a permutation");
    }
    InputTuple x(static_cast<std::size_t>(k));
    for (int pos = 0; pos < k; ++pos) {
        int i = order[static_cast<std::size_t>(pos)];
        int pred = order[static_cast<std::size_t>((pos + k - 1) % k)];
        int succ = order[static_cast<std::size_t>((pos + 1) % k)];
        x[static_cast<std::size_t>(i)] = {bits[static_cast<std::size_t>(i)], pred, succ};
    }
    return x;
}

// Throws PromiseViolation unless the (pred, succ) fields describe one cycle through all players.
inline void check_permutation_promise(const InputTuple& x) {
    const int k = static_cast<int>(x.size());
    for (int i = 0; i < k; ++i) {
        const auto& xi = x[static_cast<std::size_t>(i)];
        if (xi.size() != 3 || (xi[0] != 0 && xi[0] != 1)) throw Error(ErrorKind::PromiseViolation, "malformed permutation input");
        int pred = xi[1], succ = xi[2];
        if (pred < 0 || pred >= k || succ < 0 || succ >= k || pred == i || succ == i)
            throw Error(ErrorKind::PromiseViolation, "neighbour index out of range");
        if (x[static_cast<std::size_t>(succ)][1] != i || x[static_cast<std::size_t>(pred)][2] != i)
            throw Error(ErrorKind::PromiseViolation, "neighbour fields disagree");
    }
    int len = 0, cur = 0;
    do {
        cur = x[static_cast<std::size_t>(cur)][2];
        ++len;
    } while (cur != 0 && len <= k);
    if (len != k) throw Error(ErrorKind::PromiseViolation, "neighbour fields form more than one cycle");
}

// Player i must output the bit of its successor; so every player sends its bit to its predecessor.
inline Protocol make_permutation(int k) {
    if (k < 3) throw Error(ErrorKind::InvalidArgument, "permutation needs k >= 3");
    Protocol p = make_protocol_shell("permutation(" + std::to_string(k) + ")", k);
    std::vector<int> rest(static_cast<std::size_t>(k - 1));
    std::iota(rest.begin(), rest.end(), 1);
    do {
        std::vector<int> order{0};
        order.insert(order.end(), rest.begin(), rest.end());
        for (int code = 0; code < (1 << k); ++code) {
            std::vector<int> bits(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) bits[static_cast<std::size_t>(i)] = (code >> i) & 1;
            InputTuple x = make_permutation_input(bits, order);
            check_permutation_promise(x);
            p.input_space.push_back(std::move(x));
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    for (int i = 0; i < k; ++i)
        p.programs[static_cast<std::size_t>(i)] = [](const View& v) {
            StepResult r;
            const int pred = v.input.at(1), succ = v.input.at(2);
            if (v.round == 0) {
                r.send(pred, BitString::from_bit(v.input.at(0)));
                r.wait = {succ};
                return r;
            }
            r.output = Value{v.read[static_cast<std::size_t>(succ)].at(0).bit(0)};
            return r;
        };
    return p;
}

// Parity around a ring, masked by one private bit of player 0.
inline Protocol make_ring_private_parity(int k) {
    if (k < 3) throw Error(ErrorKind::InvalidArgument, "ring parity needs k >= 3");
    Protocol p = make_protocol_shell("ring_private_parity(" + std::to_string(k) + ")", k);
    p.input_space = boolean_cube(k, 1);
    p.private_rand[0] = {RandomComponent::uniform("r", 2)};
    p.programs[0] = [k](const View& v) {
        StepResult r;
        const int mask = v.rand.priv(0);
        if (v.round == 0) {
            r.send(1, BitString::from_bit(v.input[0] ^ mask));
            r.wait = {k - 1};
            return r;
        }
        r.output = Value{v.read[static_cast<std::size_t>(k - 1)].at(0).bit(0) ^ mask};
        return r;
    };
    for (int i = 1; i < k; ++i)
        p.programs[static_cast<std::size_t>(i)] = [i, k](const View& v) {
            StepResult r;
            if (v.round == 0) {
                r.wait = {i - 1};
                return r;
            }
            r.send((i + 1) % k, BitString::from_bit(v.read[static_cast<std::size_t>(i - 1)].at(0).bit(0) ^ v.input[0]));
            r.output = Value{};
            return r;
        };
    return p;
}

// Star parity whose output player flips its answer with probability flip.
inline Protocol make_noisy_star_parity(int k, Probability flip) {
    Protocol p = make_star_parity(k, 1);
    p.name = "noisy_star_parity(" + std::to_string(k) + "," + to_string(flip) + ")";
    p.private_rand[0] = {RandomComponent{"flip", {1 - flip, flip}}};
    auto inner = p.programs[0];
    p.programs[0] = [inner](const View& v) {
        StepResult r = inner(v);
        if (r.output) (*r.output)[0] ^= v.rand.priv(0);
        return r;
    };
    return p;
}

// Star AND in which every sender appends a private uniform bit to its message.
inline Protocol make_padded_star_and(int k) {
    Protocol p = make_protocol_shell("padded_star_and(" + std::to_string(k) + ")", k);
    p.input_space = boolean_cube(k, 1);
    p.programs[0] = [k](const View& v) {
        StepResult r;
        if (v.round == 0) {
            r.wait = others(k, 0);
            return r;
        }
        int a = v.input[0];
        for (int j = 1; j < k; ++j) a &= v.read[static_cast<std::size_t>(j)].at(0).bit(0);
        r.output = Value{a};
        return r;
    };
    for (int i = 1; i < k; ++i) {
        p.private_rand[static_cast<std::size_t>(i)] = {RandomComponent::uniform("pad", 2)};
        p.programs[static_cast<std::size_t>(i)] = [](const View& v) {
            StepResult r;
            BitString m = BitString::from_bit(v.input[0]);
            m.push_back(v.rand.priv(0));
            r.send(0, m);
            r.output = Value{};
            return r;
        };
    }
    return p;
}

// Nobody communicates; every player outputs 0.
inline Protocol make_silent(int k, int n) {
    Protocol p = make_protocol_shell("silent(" + std::to_string(k) + "," + std::to_string(n) + ")", k);
    p.input_space = boolean_cube(k, n);
    for (int i = 0; i < k; ++i)
        p.programs[static_cast<std::size_t>(i)] = [](const View&) {
            StepResult r;
            r.output = Value{0};
            return r;
        };
    return p;
}

} // namespace p2pic
