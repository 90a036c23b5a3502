#include <random>

#include <gtest/gtest.h>

#include "oracles/brute_mic.hpp"
#include "p2pic/p2pic.hpp"

using namespace p2pic;

namespace {

JointTable table_of(std::vector<std::string> names, std::vector<std::pair<std::vector<std::string>, Probability>> rows) {
    JointTable::Builder b(std::move(names));
    for (auto& [labels, p] : rows) b.add(labels, p);
    return b.finish("t");
}

FiniteDistribution<std::string> ber(Probability p1) {
    std::vector<FiniteDistribution<std::string>::Atom> a;
    if (p1 != 1) a.push_back({"0", "0", 1 - p1});
    if (p1 != 0) a.push_back({"1", "1", p1});
    return FiniteDistribution<std::string>(std::move(a));
}

JointOptions public_only() {
    JointOptions o;
    o.private_rand = false;
    return o;
}

} // namespace

TEST(Distributions, MuAtoms) {
    auto mu = dist_mu(3);
    EXPECT_EQ(mu.prob_of("0|1|1 M=1 Z=0"), Probability(1, 9));
    for (const auto& a : mu.atoms()) {
        int all = 1;
        for (const auto& xi : a.value.x) all &= xi[0];
        EXPECT_EQ(all, 0);
    }
    for (int k = 3; k <= 5; ++k) {
        auto m = dist_mu(k);
        for (int z = 0; z < k; ++z)
            for (int i = 0; i < k; ++i) {
                if (i == z) continue;
                Probability num = m.prob([&](const InputPoint& pt) { return pt.find_aux("Z")->at(0) == z && pt.x[static_cast<std::size_t>(i)][0] == 1; });
                Probability den = m.prob([&](const InputPoint& pt) { return pt.find_aux("Z")->at(0) == z; });
                EXPECT_EQ(num / den, Probability(2, 3));
            }
    }
}

TEST(Distributions, MuN) {
    auto m1 = dist_mu_n(3, 1);
    auto m = dist_mu(3);
    ASSERT_EQ(m1.size(), m.size());
    for (const auto& a : m.atoms()) EXPECT_EQ(m1.prob_of(a.label), a.p);
    auto m2 = dist_mu_n(3, 2);
    EXPECT_EQ(m2.prob([](const InputPoint& pt) { return *pt.find_aux("M") == Value{1, 1}; }), Probability(1, 9));
    // Coordinate marginal equals mu.
    std::map<std::string, Probability> marg;
    for (const auto& a : m2.atoms()) {
        InputPoint pt;
        for (const auto& xi : a.value.x) pt.x.push_back(Value{xi[0]});
        pt.aux = {{"M", Value{a.value.find_aux("M")->at(0)}}, {"Z", Value{a.value.find_aux("Z")->at(0)}}};
        marg[point_label(pt)] += a.p;
    }
    for (const auto& a : m.atoms()) EXPECT_EQ(marg[a.label], a.p);
}

TEST(Distributions, Uniform) {
    auto u = dist_uniform(2, 1);
    ASSERT_EQ(u.size(), 4u);
    for (const auto& a : u.atoms()) EXPECT_EQ(a.p, Probability(1, 4));
    auto u3 = dist_uniform(3, 1);
    EXPECT_EQ(u3.prob([](const InputPoint& pt) { return (pt.x[0][0] ^ pt.x[1][0] ^ pt.x[2][0]) == 1; }), Probability(1, 2));
    EXPECT_NEAR(static_cast<double>(dist_uniform(3, 2).entropy()), 6.0, 1e-12);
    EXPECT_THROW(dist_uniform(5, 5, 1000), Error);
}

TEST(Entropy, Bernoulli) {
    EXPECT_NEAR(static_cast<double>(ber(Probability(1, 2)).entropy()), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(ber(Probability(1, 3)).entropy()), std::log2(3.0) - 2.0 / 3, 1e-12);
    EXPECT_NEAR(static_cast<double>(ber(Probability(0)).entropy()), 0.0, 1e-12);
}

TEST(MutualInfo, Basics) {
    auto t = table_of({"A", "B", "C"}, {{{"0", "0", "x"}, Probability(1, 2)}, {{"1", "1", "x"}, Probability(1, 2)}});
    EXPECT_NEAR(static_cast<double>(cond_mutual_info(t, {"A"}, {"B"})), 1.0, 1e-12);
    auto u = table_of({"A", "B", "C"}, {{{"0", "0", "0"}, Probability(1, 4)},
                                        {{"0", "1", "0"}, Probability(1, 4)},
                                        {{"1", "0", "1"}, Probability(1, 4)},
                                        {{"1", "1", "1"}, Probability(1, 4)}});
    EXPECT_NEAR(static_cast<double>(cond_mutual_info(u, {"A"}, {"B"}, {"C"})), 0.0, 1e-12);
    EXPECT_THROW(cond_mutual_info(u, {"A"}, {"A"}), Error);
    EXPECT_THROW(cond_mutual_info(u, {"Q"}, {"A"}), Error);
}

TEST(MutualInfo, ChainRuleFuzz) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> val(0, 2), w(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::map<std::vector<std::string>, int> rows;
        int total = 0;
        for (int r = 0; r < 12; ++r) {
            std::vector<std::string> labels;
            for (int c = 0; c < 4; ++c) labels.push_back(std::to_string(val(rng)));
            int v = w(rng);
            rows[labels] += v;
            total += v;
        }
        JointTable::Builder b({"A", "B", "C", "D"});
        for (const auto& [l, v] : rows) b.add(l, Probability(v, total));
        JointTable t = b.finish("fuzz");
        long double lhs = cond_mutual_info(t, {"A", "B"}, {"C"}, {"D"});
        long double rhs = cond_mutual_info(t, {"A"}, {"C"}, {"D"}) + cond_mutual_info(t, {"B"}, {"C"}, {"D", "A"});
        EXPECT_NEAR(static_cast<double>(lhs - rhs), 0.0, 1e-9);
        EXPECT_GE(static_cast<double>(cond_mutual_info(t, {"A"}, {"B"}, {"C"})), -1e-12);
    }
}

TEST(Distances, Hellinger) {
    auto p = ber(Probability(1, 2));
    EXPECT_NEAR(static_cast<double>(hellinger(p, p)), 0.0, 1e-9);
    EXPECT_NEAR(static_cast<double>(hellinger(ber(Probability(0)), ber(Probability(1)))), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(stat_distance(p, p)), 0.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(stat_distance(ber(Probability(0)), ber(Probability(1)))), 1.0, 1e-12);
    EXPECT_EQ(stat_distance_exact(ber(Probability(1, 2)), ber(Probability(1, 4))), Probability(1, 4));
}

TEST(Distances, DomainMismatch) {
    FiniteDistribution<int> a({{"a", 1, Probability(1)}});
    FiniteDistribution<int> b({{"a", 2, Probability(1)}});
    EXPECT_THROW(hellinger(a, b), Error);
}

TEST(JointTable, Normalization) {
    JointTable t = build_joint(make_star_and(3), dist_mu(3), public_only());
    Probability total = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) total += t.prob(r);
    EXPECT_EQ(total, 1);
    EXPECT_NEAR(static_cast<double>(cond_entropy(t, {"Pi"}, cols_x(3))), 0.0, 1e-12);
}

TEST(JointTable, CapEnforced) { EXPECT_THROW(build_joint(make_star_parity(4, 2), dist_uniform(4, 2), [] { JointOptions o; o.cap = 10; return o; }()), Error); }

TEST(Measures, MicMatchesOracle) {
    JointTable t = build_joint(make_star_parity(3, 1), dist_uniform(3, 1));
    MeasureReport r = mic(t);
    EXPECT_NEAR(r.value, oracle::mic_star_parity3(), 1e-9);
    EXPECT_NEAR(r.value, 4.0, 1e-9);
    ASSERT_EQ(r.breakdown.size(), 3u);
    EXPECT_NEAR(r.breakdown[0], 2.0, 1e-9);
    EXPECT_NEAR(r.breakdown[1], 1.0, 1e-9);
}

TEST(Measures, SilentIsZero) {
    JointTable t = build_joint(make_silent(4, 1), dist_mu(4));
    EXPECT_NEAR(mic(t).value, 0.0, 1e-12);
    EXPECT_NEAR(smic(t).value, 0.0, 1e-12);
    EXPECT_NEAR(pic(t).value, 0.0, 1e-12);
    auto ics = intermediate_ics(t);
    EXPECT_NEAR(ics.ic_hat.value, 0.0, 1e-12);
    EXPECT_NEAR(ics.ic_tilde.value, 0.0, 1e-12);
}

TEST(Measures, RingPicAndRandomness) {
    JointTable t = build_joint(make_ring_private_parity(3), dist_uniform(3, 1));
    EXPECT_NEAR(pic(t).value, 3.0, 1e-9);
    EXPECT_NEAR(randomness_cost(t).value, 1.0, 1e-9);
    EXPECT_NEAR(static_cast<double>(cond_entropy(t, {"Pi"}, cols_x(3) + std::vector<std::string>{"Rp"})), 1.0, 1e-9);
}

TEST(Measures, DeterministicPicEqualsLearningTerms) {
    JointTable t = build_joint(make_star_parity(3, 1), dist_uniform(3, 1));
    long double learn = 0;
    for (int i = 0; i < 3; ++i) learn += cond_mutual_info(t, cols_x(3, i), {col_pi(i)}, {col_x(i)});
    EXPECT_NEAR(pic(t).value, static_cast<double>(learn), 1e-9);
    EXPECT_NEAR(randomness_cost(t).value, 0.0, 1e-12);
}

TEST(Measures, UnusedRandomnessCostsNothing) {
    Protocol p = make_star_parity(3, 1);
    p.private_rand[1] = {RandomComponent::uniform("u1", 2), RandomComponent::uniform("u2", 2)};
    EXPECT_NEAR(randomness_cost(build_joint(p, dist_uniform(3, 1))).value, 0.0, 1e-12);
}

TEST(Measures, SmicAndStarAnd) {
    for (int k = 4; k <= 5; ++k) {
        JointTable t = build_joint(make_star_and(k), dist_mu(k), public_only());
        EXPECT_GE(smic(t).value, (k - 1) / 96.0);
    }
}

TEST(Decoder, ExternalErrors) {
    Protocol sa = make_star_and(3);
    EXPECT_EQ(best_external_decoder(sa, fn_and(3), sa.input_space).eps, 0);
    Protocol si = make_silent(3, 1);
    Decoder d = best_external_decoder(si, fn_and(3), si.input_space);
    EXPECT_GT(d.eps, 0);
    EXPECT_EQ(d.transcripts, 1u);
    Protocol sd = make_star_disj(4, 2);
    EXPECT_EQ(best_external_decoder(sd, fn_disj(4, 2), sd.input_space).eps, 0);
}

TEST(Toolkit, HellingerFuzz) {
    for (const auto& r : fuzz_hellinger_toolkit(1000, 3)) EXPECT_TRUE(r.pass) << r.name << " " << r.detail;
}
