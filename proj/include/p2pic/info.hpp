#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "joint_table.hpp"

namespace p2pic {

inline constexpr double kTol = 1e-9;

inline long double entropy(const JointTable& t, const std::vector<std::string>& vars) { return t.entropy(vars); }

// H(A | C)
inline long double cond_entropy(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& c) {
    return t.entropy(a + c) - t.entropy(c);
}

// I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)
inline long double cond_mutual_info(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& b,
                                    const std::vector<std::string>& c = {}) {
    std::set<std::string> sa(a.begin(), a.end());
    for (const auto& v : b)
        if (sa.count(v)) throw Error(ErrorKind::InvalidArgument, "variable " + v + " appears in both arguments");
    t.require(a + b + c);
    return t.entropy(a + c) + t.entropy(b + c) - t.entropy(a + b + c) - t.entropy(c);
}

namespace detail {

template <class T>
std::vector<std::pair<long double, long double>> aligned(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    std::map<std::string, std::pair<long double, long double>> m;
    std::map<std::string, const T*> values;
    for (const auto& a : p.atoms()) {
        m[a.label].first = to_long_double(a.p);
        values[a.label] = &a.value;
    }
    for (const auto& a : q.atoms()) {
        auto it = values.find(a.label);
        if (it != values.end() && !(*it->second == a.value))
            throw Error(ErrorKind::DomainMismatch, "label '" + a.label + "' carries different values");
        m[a.label].second = to_long_double(a.p);
    }
    std::vector<std::pair<long double, long double>> out;
    for (const auto& [l, pq] : m) out.push_back(pq);
    return out;
}

} // namespace detail

// h^2 = 1 - sum sqrt(p q)
template <class T>
long double hellinger_sq(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    long double bc = 0;
    for (auto [a, b] : detail::aligned(p, q)) bc += std::sqrt(a * b);
    return std::max<long double>(0, 1 - bc);
}

template <class T>
long double hellinger(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    return std::sqrt(hellinger_sq(p, q));
}

template <class T>
long double stat_distance(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    long double s = 0;
    for (auto [a, b] : detail::aligned(p, q)) s += std::fabs(a - b);
    return s / 2;
}

// Exact statistical distance, for equality tests.
template <class T>
Probability stat_distance_exact(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    std::map<std::string, Probability> diff;
    for (const auto& a : p.atoms()) diff[a.label] += a.p;
    for (const auto& a : q.atoms()) diff[a.label] -= a.p;
    Probability s = 0;
    for (auto& [l, d] : diff) s += d < 0 ? Probability(-d) : d;
    return s / 2;
}

// I(S;Y) where S is a uniform bit and Y ~ p if S = 0, Y ~ q if S = 1.
template <class T>
long double switch_mutual_info(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
    auto h = [](long double v) { return v > 0 ? -v * std::log2(v) : 0.0L; };
    long double s = 0;
    for (auto [a, b] : detail::aligned(p, q)) s += h((a + b) / 2) - (h(a) + h(b)) / 2;
    return s;
}

} // namespace p2pic
