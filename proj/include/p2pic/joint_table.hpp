#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "executor.hpp"
#include "model.hpp"
#include "rational.hpp"

namespace p2pic {

// Exact joint distribution over named discrete variables. Rows carry integer weights over a
// common denominator, so marginal sums are exact.
class JointTable {
public:
    struct Column {
        std::string name;
        std::vector<std::string> labels; // code -> label
    };

    JointTable() = default;

    const std::string& id() const noexcept { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }
    std::size_t rows() const noexcept { return weight_.size(); }
    std::size_t columns() const noexcept { return cols_.size(); }
    const Column& column(std::size_t c) const { return cols_.at(c); }
    std::uint64_t denominator() const noexcept { return denom_; }
    std::uint64_t weight(std::size_t row) const { return weight_.at(row); }
    std::uint32_t code(std::size_t col, std::size_t row) const { return codes_.at(col).at(row); }
    const std::string& label(std::size_t col, std::size_t row) const { return cols_.at(col).labels.at(code(col, row)); }
    Probability prob(std::size_t row) const { return Probability(BigInt(weight(row)), BigInt(denom_)); }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    int col(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(ErrorKind::MissingColumns, "table '" + id_ + "' has no column " + name);
        return it->second;
    }

    void require(const std::vector<std::string>& names) const {
        std::string missing;
        for (const auto& n : names)
            if (!has(n)) missing += " " + n;
        if (!missing.empty()) throw Error(ErrorKind::MissingColumns, "table '" + id_ + "' lacks" + missing);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& c : cols_) out.push_back(c.name);
        return out;
    }

    // Dense joint code per row for a set of columns; returns the number of distinct values.
    std::size_t group(const std::vector<int>& cs, std::vector<std::uint32_t>& out) const {
        out.assign(rows(), 0);
        if (cs.empty()) return 1;
        out = codes_[static_cast<std::size_t>(cs[0])];
        std::size_t distinct = cols_[static_cast<std::size_t>(cs[0])].labels.size();
        for (std::size_t c = 1; c < cs.size(); ++c) {
            const auto& next = codes_[static_cast<std::size_t>(cs[c])];
            std::unordered_map<std::uint64_t, std::uint32_t> ids;
            ids.reserve(std::min<std::size_t>(rows(), distinct * cols_[static_cast<std::size_t>(cs[c])].labels.size()));
            for (std::size_t r = 0; r < rows(); ++r) {
                std::uint64_t key = (static_cast<std::uint64_t>(out[r]) << 32) | next[r];
                auto [it, fresh] = ids.emplace(key, static_cast<std::uint32_t>(ids.size()));
                out[r] = it->second;
            }
            distinct = ids.size();
        }
        return distinct;
    }

    long double entropy(const std::vector<std::string>& vars) const {
        std::vector<int> cs;
        for (const auto& v : vars) cs.push_back(col(v));
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(cs);
            if (it != cache_.end()) return it->second;
        }
        std::vector<std::uint32_t> g;
        std::size_t distinct = group(cs, g);
        std::vector<std::uint64_t> mass(distinct, 0);
        for (std::size_t r = 0; r < rows(); ++r) mass[g[r]] += weight_[r];
        const long double d = static_cast<long double>(denom_);
        long double h = 0;
        for (auto w : mass)
            if (w) {
                long double p = static_cast<long double>(w) / d;
                h -= p * std::log2(p);
            }
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cache_[cs] = h;
        return h;
    }

    // Exact marginal over vars: joint label tuple -> probability, in first-occurrence row order.
    std::vector<std::pair<std::vector<std::string>, Probability>> marginal(const std::vector<std::string>& vars) const {
        std::vector<int> cs;
        for (const auto& v : vars) cs.push_back(col(v));
        std::vector<std::uint32_t> g;
        std::size_t distinct = group(cs, g);
        std::vector<std::uint64_t> mass(distinct, 0);
        std::vector<std::size_t> first(distinct, rows());
        for (std::size_t r = 0; r < rows(); ++r) {
            mass[g[r]] += weight_[r];
            if (first[g[r]] == rows()) first[g[r]] = r;
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < distinct; ++i)
            if (mass[i]) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
        std::vector<std::pair<std::vector<std::string>, Probability>> out;
        for (auto i : order) {
            std::vector<std::string> labels;
            for (int c : cs) labels.push_back(label(static_cast<std::size_t>(c), first[i]));
            out.emplace_back(std::move(labels), Probability(BigInt(mass[i]), BigInt(denom_)));
        }
        return out;
    }

    // Distribution of target given cond == values, as a labeled distribution over joined target labels.
    FiniteDistribution<std::string> conditional(const std::vector<std::string>& target, const std::vector<std::string>& cond,
                                                const std::vector<std::string>& values) const {
        if (cond.size() != values.size()) throw Error(ErrorKind::InvalidArgument, "condition arity mismatch");
        std::vector<int> cc, tc;
        for (const auto& c : cond) cc.push_back(col(c));
        for (const auto& t : target) tc.push_back(col(t));
        std::map<std::string, std::uint64_t> mass;
        std::vector<std::string> order;
        std::uint64_t total = 0;
        for (std::size_t r = 0; r < rows(); ++r) {
            bool ok = true;
            for (std::size_t i = 0; i < cc.size() && ok; ++i) ok = label(static_cast<std::size_t>(cc[i]), r) == values[i];
            if (!ok) continue;
            std::string key;
            for (std::size_t i = 0; i < tc.size(); ++i) {
                if (i) key += " ";
                key += label(static_cast<std::size_t>(tc[i]), r);
            }
            auto [it, fresh] = mass.emplace(key, 0);
            if (fresh) order.push_back(key);
            it->second += weight_[r];
            total += weight_[r];
        }
        if (total == 0) throw Error(ErrorKind::ZeroProbabilityCondition, "conditioning event has probability 0");
        std::vector<FiniteDistribution<std::string>::Atom> atoms;
        for (const auto& key : order)
            atoms.push_back({key, key, Probability(BigInt(mass[key]), BigInt(total))});
        return FiniteDistribution<std::string>(std::move(atoms));
    }

    std::string to_csv() const {
        std::ostringstream os;
        auto quote = [](const std::string& s) {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) {
                if (c == '"') q += '"';
                q += c;
            }
            return q + "\"";
        };
        for (const auto& c : cols_) os << quote(c.name) << ",";
        os << "probability\n";
        for (std::size_t r = 0; r < rows(); ++r) {
            for (std::size_t c = 0; c < cols_.size(); ++c) os << quote(label(c, r)) << ",";
            os << to_string(prob(r)) << "\n";
        }
        return os.str();
    }

    class Builder;

    JointTable(const JointTable& o)
        : id_(o.id_), cols_(o.cols_), index_(o.index_), codes_(o.codes_), weight_(o.weight_), denom_(o.denom_) {}
    JointTable(JointTable&& o) noexcept
        : id_(std::move(o.id_)), cols_(std::move(o.cols_)), index_(std::move(o.index_)), codes_(std::move(o.codes_)),
          weight_(std::move(o.weight_)), denom_(o.denom_) {}
    JointTable& operator=(JointTable o) noexcept {
        id_ = std::move(o.id_);
        cols_ = std::move(o.cols_);
        index_ = std::move(o.index_);
        codes_ = std::move(o.codes_);
        weight_ = std::move(o.weight_);
        denom_ = o.denom_;
        cache_.clear();
        return *this;
    }

private:
    std::string id_;
    std::vector<Column> cols_;
    std::map<std::string, int> index_;
    std::vector<std::vector<std::uint32_t>> codes_;
    std::vector<std::uint64_t> weight_;
    std::uint64_t denom_ = 1;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<int>, long double> cache_;
};

class JointTable::Builder {
public:
    explicit Builder(std::vector<std::string> names) {
        for (auto& n : names) {
            table_.index_[n] = static_cast<int>(table_.cols_.size());
            table_.cols_.push_back({std::move(n), {}});
        }
        interns_.resize(table_.cols_.size());
        table_.codes_.resize(table_.cols_.size());
    }

    void add(const std::vector<std::string>& labels, const Probability& p) {
        if (labels.size() != table_.cols_.size()) throw Error(ErrorKind::InvalidArgument, "row arity mismatch");
        std::string key;
        key.reserve(labels.size() * 4);
        std::vector<std::uint32_t> codes(labels.size());
        for (std::size_t c = 0; c < labels.size(); ++c) {
            auto [it, fresh] = interns_[c].emplace(labels[c], static_cast<std::uint32_t>(table_.cols_[c].labels.size()));
            if (fresh) table_.cols_[c].labels.push_back(labels[c]);
            codes[c] = it->second;
            key.append(reinterpret_cast<const char*>(&codes[c]), sizeof(std::uint32_t));
        }
        auto [it, fresh] = rows_.emplace(std::move(key), probs_.size());
        if (fresh) {
            probs_.push_back(p);
            for (std::size_t c = 0; c < codes.size(); ++c) table_.codes_[c].push_back(codes[c]);
        } else {
            probs_[it->second] += p;
        }
    }

    JointTable finish(std::string id) {
        BigInt d = 1;
        Probability total = 0;
        for (const auto& p : probs_) {
            BigInt den = boost::multiprecision::denominator(p);
            d = d / boost::multiprecision::gcd(d, den) * den;
            total += p;
        }
        if (total != 1) throw Error(ErrorKind::InvalidArgument, "joint table mass is " + to_string(total));
        if (d > (BigInt(1) << 63)) throw Error(ErrorKind::SupportTooLarge, "common denominator exceeds 2^63");
        table_.denom_ = d.convert_to<std::uint64_t>();
        for (const auto& p : probs_) {
            BigInt w = boost::multiprecision::numerator(p) * (d / boost::multiprecision::denominator(p));
            table_.weight_.push_back(w.convert_to<std::uint64_t>());
        }
        table_.id_ = std::move(id);
        return std::move(table_);
    }

private:
    JointTable table_;
    std::vector<std::unordered_map<std::string, std::uint32_t>> interns_;
    std::unordered_map<std::string, std::size_t> rows_;
    std::vector<Probability> probs_;
};

// Column names, 1-based player labels.
inline std::string col_x(int i) { return "X" + std::to_string(i + 1); }
inline std::string col_r(int i) { return "R" + std::to_string(i + 1); }
inline std::string col_pi(int i) { return "Pi" + std::to_string(i + 1); }
inline std::string col_in(int i) { return "PiIn" + std::to_string(i + 1); }
inline std::string col_out(int i) { return "O" + std::to_string(i + 1); }
inline std::string col_note(int i, const std::string& key) { return "note" + std::to_string(i + 1) + "." + key; }

inline std::vector<std::string> cols_x(int k, int except = -1) {
    std::vector<std::string> v;
    for (int i = 0; i < k; ++i)
        if (i != except) v.push_back(col_x(i));
    return v;
}
inline std::vector<std::string> cols_r(int k, int except = -1) {
    std::vector<std::string> v;
    for (int i = 0; i < k; ++i)
        if (i != except) v.push_back(col_r(i));
    return v;
}

inline std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

struct JointOptions {
    bool private_rand = true; // include R_i columns (unread components expanded)
    const FunctionSpec* function = nullptr; // adds column F
    std::vector<std::pair<int, std::string>> notes;
    std::size_t cap = kDefaultCap;
    std::string id;
};

inline int thread_count() {
    const char* env = std::getenv("P2PIC_THREADS");
    int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (env) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, hw);
    }
    return hw;
}

namespace detail {

inline std::string join_atoms(const std::vector<int>& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(a[i]);
    }
    return s;
}

struct PathRow {
    std::vector<std::string> labels; // protocol-derived columns
    Probability prob;
};

// Calls visit(assignment, prob) for every completion of the listed unassigned components.
template <class F>
void expand_unread(const Protocol& p, RandomAssignment a, Probability prob, bool priv, F&& visit) {
    struct Slot {
        bool pub;
        std::size_t player, comp;
    };
    std::vector<Slot> slots;
    for (std::size_t c = 0; c < a.pub.size(); ++c)
        if (a.pub[c] < 0) slots.push_back({true, 0, c});
    if (priv)
        for (std::size_t i = 0; i < a.priv.size(); ++i)
            for (std::size_t c = 0; c < a.priv[i].size(); ++c)
                if (a.priv[i][c] < 0) slots.push_back({false, i, c});
    std::function<void(std::size_t, Probability)> rec = [&](std::size_t s, Probability pr) {
        if (s == slots.size()) {
            visit(a, pr);
            return;
        }
        const auto& sl = slots[s];
        const auto& comp = sl.pub ? p.public_rand[sl.comp] : p.private_rand[sl.player][sl.comp];
        for (std::size_t atom = 0; atom < comp.probs.size(); ++atom) {
            (sl.pub ? a.pub[sl.comp] : a.priv[sl.player][sl.comp]) = static_cast<int>(atom);
            rec(s + 1, pr * comp.probs[atom]);
        }
        (sl.pub ? a.pub[sl.comp] : a.priv[sl.player][sl.comp]) = -1;
    };
    rec(0, std::move(prob));
}

} // namespace detail

// One row per (input atom, randomness outcome), merged on equal column values.
inline JointTable build_joint(const Protocol& p, const InputDistribution& dist, const JointOptions& opts = {}) {
    const int k = p.k;
    std::vector<std::string> aux_names;
    if (dist.size()) {
        for (const auto& [n, v] : dist.atoms().front().value.aux) aux_names.push_back(n);
    }
    std::vector<std::string> names = cols_x(k);
    names.insert(names.end(), aux_names.begin(), aux_names.end());
    if (opts.function) names.push_back("F");
    const std::size_t proto_start = names.size();
    if (opts.private_rand)
        for (int i = 0; i < k; ++i) names.push_back(col_r(i));
    names.push_back("Rp");
    for (int i = 0; i < k; ++i) names.push_back(col_pi(i));
    for (int i = 0; i < k; ++i) names.push_back(col_in(i));
    names.push_back("Pi");
    for (int i = 0; i < k; ++i) names.push_back(col_out(i));
    for (const auto& [i, key] : opts.notes) names.push_back(col_note(i, key));

    // Distinct inputs, in first-occurrence order.
    std::vector<InputTuple> xs;
    std::map<InputTuple, std::size_t> xindex;
    for (const auto& a : dist.atoms()) {
        if (static_cast<int>(a.value.x.size()) != k) throw Error(ErrorKind::DomainMismatch, "input arity differs from k");
        if (xindex.emplace(a.value.x, xs.size()).second) xs.push_back(a.value.x);
    }

    std::vector<std::vector<detail::PathRow>> per_x(xs.size());
    std::vector<std::string> errors(xs.size());
    std::atomic<std::size_t> total_rows{0};
    auto work = [&](std::size_t xi) {
        auto& out = per_x[xi];
        PathOptions po;
        po.cap = opts.cap;
        try {
            for_each_path(p, xs[xi], [&](const RandomAssignment& a, const Probability& prob, const ExecutionResult& r) {
                std::vector<std::string> fixed;
                for (int i = 0; i < k; ++i) fixed.push_back(r.transcript.player_key(i));
                for (int i = 0; i < k; ++i) fixed.push_back(r.transcript.incoming_key(i));
                fixed.push_back(r.transcript.key());
                for (int i = 0; i < k; ++i) {
                    const auto& o = r.outputs[static_cast<std::size_t>(i)];
                    fixed.push_back(o ? value_key(*o) : "_");
                }
                for (const auto& [i, key] : opts.notes) {
                    const auto& nm = r.notes.at(static_cast<std::size_t>(i));
                    auto it = nm.find(key);
                    fixed.push_back(it == nm.end() ? "" : it->second);
                }
                detail::expand_unread(p, a, prob, opts.private_rand, [&](const RandomAssignment& full, const Probability& pr) {
                    detail::PathRow row;
                    if (opts.private_rand)
                        for (int i = 0; i < k; ++i) row.labels.push_back(detail::join_atoms(full.priv[static_cast<std::size_t>(i)]));
                    row.labels.push_back(detail::join_atoms(full.pub));
                    row.labels.insert(row.labels.end(), fixed.begin(), fixed.end());
                    row.prob = pr;
                    if (++total_rows > opts.cap)
                        throw Error(ErrorKind::SupportTooLarge, "joint table exceeds cap " + std::to_string(opts.cap));
                    out.push_back(std::move(row));
                });
            }, po);
        } catch (const Error& e) {
            errors[xi] = e.what();
            if (e.kind() == ErrorKind::SupportTooLarge)
                errors[xi] = "\x01" + errors[xi].substr(std::string(to_string(e.kind())).size() + 2);
        }
    };

    const int threads = std::min<int>(thread_count(), static_cast<int>(xs.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < xs.size();) work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e.empty()) continue;
        if (e[0] == '\x01') throw Error(ErrorKind::SupportTooLarge, e.substr(1));
        throw Error(ErrorKind::InvalidProtocol, "execution failed while building table: " + e);
    }

    JointTable::Builder b(names);
    std::vector<std::string> labels(names.size());
    for (const auto& atom : dist.atoms()) {
        std::size_t c = 0;
        for (int i = 0; i < k; ++i) labels[c++] = value_key(atom.value.x[static_cast<std::size_t>(i)]);
        for (const auto& n : aux_names) {
            const Value* v = atom.value.find_aux(n);
            if (!v) throw Error(ErrorKind::DomainMismatch, "atom lacks auxiliary variable " + n);
            labels[c++] = value_key(*v);
        }
        if (opts.function) labels[c++] = value_key(opts.function->value(atom.value.x));
        for (const auto& row : per_x[xindex.at(atom.value.x)]) {
            std::copy(row.labels.begin(), row.labels.end(), labels.begin() + static_cast<std::ptrdiff_t>(proto_start));
            b.add(labels, atom.p * row.prob);
        }
    }
    return b.finish(opts.id.empty() ? p.name : opts.id);
}

} // namespace p2pic
