#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "rational.hpp"

namespace p2pic {

inline constexpr std::size_t kDefaultCap = 1000000;

template <class T>
class FiniteDistribution {
public:
    struct Atom {
        std::string label;
        T value;
        Probability p;
    };

    FiniteDistribution() = default;
    explicit FiniteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) { validate(); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    Probability prob_of(const std::string& label) const {
        for (const auto& a : atoms_)
            if (a.label == label) return a.p;
        return 0;
    }

    template <class Pred>
    Probability prob(Pred pred) const {
        Probability total = 0;
        for (const auto& a : atoms_)
            if (pred(a.value)) total += a.p;
        return total;
    }

    long double entropy() const {
        long double h = 0;
        for (const auto& a : atoms_) {
            long double p = to_long_double(a.p);
            h -= p * std::log2(p);
        }
        return h;
    }

private:
    void validate() const {
        std::set<std::string> seen;
        Probability total = 0;
        for (const auto& a : atoms_) {
            if (a.p <= 0) throw Error(ErrorKind::InvalidArgument, "atom '" + a.label + "' has non-positive probability");
            if (!seen.insert(a.label).second) throw Error(ErrorKind::InvalidArgument, "duplicate atom label '" + a.label + "'");
            total += a.p;
        }
        if (total != 1) throw Error(ErrorKind::InvalidArgument, "probabilities sum to " + to_string(total));
    }

    std::vector<Atom> atoms_;
};

// A point of an input distribution: the players' inputs plus named auxiliary variables such as M and Z.
struct InputPoint {
    InputTuple x;
    std::vector<std::pair<std::string, Value>> aux;

    const Value* find_aux(const std::string& name) const {
        for (const auto& [n, v] : aux)
            if (n == name) return &v;
        return nullptr;
    }
};

using InputDistribution = FiniteDistribution<InputPoint>;

inline std::string point_label(const InputPoint& pt) {
    std::string s = input_key(pt.x);
    for (const auto& [n, v] : pt.aux) s += " " + n + "=" + value_key(v);
    return s;
}

// (M, Z, X) with Pr[M=0]=2/3, Z uniform, X_Z=0, X_{-Z} uniform if M=0 and all ones if M=1.
// Z is stored 0-based.
inline InputDistribution dist_mu(int k) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "dist_mu needs k >= 2");
    std::vector<InputDistribution::Atom> atoms;
    const Probability p0 = Probability(2, 3) / k / (BigInt(1) << (k - 1));
    const Probability p1 = Probability(1, 3) / k;
    for (int z = 0; z < k; ++z) {
        for (int m = 0; m < 2; ++m) {
            const int free_bits = k - 1;
            const long long count = m == 0 ? (1LL << free_bits) : 1;
            for (long long c = 0; c < count; ++c) {
                InputPoint pt;
                pt.x.assign(static_cast<std::size_t>(k), Value{0});
                int bit = 0;
                for (int i = 0; i < k; ++i) {
                    if (i == z) continue;
                    pt.x[static_cast<std::size_t>(i)][0] = m == 1 ? 1 : static_cast<int>((c >> bit) & 1);
                    ++bit;
                }
                pt.aux = {{"M", {m}}, {"Z", {z}}};
                atoms.push_back({point_label(pt), std::move(pt), m == 0 ? p0 : p1});
            }
        }
    }
    return InputDistribution(std::move(atoms));
}

inline void check_cap(long double count, std::size_t cap, const std::string& what) {
    if (count > static_cast<long double>(cap))
        throw Error(ErrorKind::SupportTooLarge, what + " needs " + std::to_string(static_cast<long long>(count)) +
                                                    " atoms, cap is " + std::to_string(cap));
}

// n independent copies of mu; X_i becomes an n-bit vector, M and Z n-tuples.
inline InputDistribution dist_mu_n(int k, int n, std::size_t cap = kDefaultCap) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "dist_mu_n needs n >= 1");
    InputDistribution base = dist_mu(k);
    check_cap(std::pow(static_cast<long double>(base.size()), n), cap, "mu^n");
    std::vector<InputDistribution::Atom> cur;
    {
        InputPoint empty;
        empty.x.assign(static_cast<std::size_t>(k), Value{});
        empty.aux = {{"M", {}}, {"Z", {}}};
        cur.push_back({"", std::move(empty), Probability(1)});
    }
    for (int l = 0; l < n; ++l) {
        std::vector<InputDistribution::Atom> next;
        next.reserve(cur.size() * base.size());
        for (const auto& a : cur) {
            for (const auto& b : base.atoms()) {
                InputPoint pt = a.value;
                for (int i = 0; i < k; ++i)
                    pt.x[static_cast<std::size_t>(i)].push_back(b.value.x[static_cast<std::size_t>(i)][0]);
                pt.aux[0].second.push_back(b.value.aux[0].second[0]);
                pt.aux[1].second.push_back(b.value.aux[1].second[0]);
                next.push_back({"", std::move(pt), a.p * b.p});
            }
        }
        cur = std::move(next);
    }
    for (auto& a : cur) a.label = point_label(a.value);
    return InputDistribution(std::move(cur));
}

inline InputDistribution dist_uniform(int k, int n, std::size_t cap = kDefaultCap) {
    if (k < 2 || n < 1) throw Error(ErrorKind::InvalidArgument, "dist_uniform needs k >= 2, n >= 1");
    check_cap(std::pow(2.0L, k * n), cap, "uniform");
    std::vector<InputDistribution::Atom> atoms;
    const Probability p = Probability(1) / (BigInt(1) << (k * n));
    for (auto& x : boolean_cube(k, n)) {
        InputPoint pt{std::move(x), {}};
        atoms.push_back({point_label(pt), std::move(pt), p});
    }
    return InputDistribution(std::move(atoms));
}

// Uniform over an explicit list of input tuples.
inline InputDistribution dist_uniform_over(const std::vector<InputTuple>& xs) {
    std::vector<InputDistribution::Atom> atoms;
    const Probability p(1, static_cast<long long>(xs.size()));
    for (const auto& x : xs) {
        InputPoint pt{x, {}};
        atoms.push_back({point_label(pt), std::move(pt), p});
    }
    return InputDistribution(std::move(atoms));
}

} // namespace p2pic
