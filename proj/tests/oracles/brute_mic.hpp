#pragma once

// Brute-force reference for the two-message star parity protocol on three players.
// Hand-modelled: nothing here touches the library's executor, tables or measures.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace oracle {

struct Outcome {
    std::array<int, 3> x;
    std::array<std::string, 3> pi; // what each player saw and sent, as a string
    double p;
};

// Players 2 and 3 send their bit to player 1; player 1 sends nothing.
inline std::vector<Outcome> star_parity3_uniform() {
    std::vector<Outcome> out;
    for (int code = 0; code < 8; ++code) {
        std::array<int, 3> x{code & 1, (code >> 1) & 1, (code >> 2) & 1};
        Outcome o{x, {}, 1.0 / 8};
        o.pi[0] = "in2=" + std::to_string(x[1]) + " in3=" + std::to_string(x[2]);
        o.pi[1] = "out1=" + std::to_string(x[1]);
        o.pi[2] = "out1=" + std::to_string(x[2]);
        out.push_back(o);
    }
    return out;
}

using Key = std::function<std::string(const Outcome&)>;

inline double H(const std::vector<Outcome>& os, const Key& key) {
    std::map<std::string, double> m;
    for (const auto& o : os) m[key(o)] += o.p;
    double h = 0;
    for (const auto& [k, p] : m)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

// I(A;B|C) from four joint entropies.
inline double I(const std::vector<Outcome>& os, const Key& a, const Key& b, const Key& c) {
    auto cat = [](Key u, Key v) { return Key([u, v](const Outcome& o) { return u(o) + "/" + v(o); }); };
    return H(os, cat(a, c)) + H(os, cat(b, c)) - H(os, cat(cat(a, b), c)) - H(os, c);
}

// sum_i I(X_{-i}; Pi_i | X_i) + I(X_i; Pi_i | X_{-i}); there is no randomness.
inline double mic_star_parity3() {
    auto os = star_parity3_uniform();
    double total = 0;
    for (int i = 0; i < 3; ++i) {
        Key own = [i](const Outcome& o) { return std::to_string(o.x[static_cast<std::size_t>(i)]); };
        Key rest = [i](const Outcome& o) {
            std::string s;
            for (int j = 0; j < 3; ++j)
                if (j != i) s += std::to_string(o.x[static_cast<std::size_t>(j)]);
            return s;
        };
        Key pi = [i](const Outcome& o) { return o.pi[static_cast<std::size_t>(i)]; };
        total += I(os, rest, pi, own) + I(os, own, pi, rest);
    }
    return total;
}

} // namespace oracle
