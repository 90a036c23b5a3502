#include <gtest/gtest.h>

#include "p2pic/p2pic.hpp"

using namespace p2pic;

namespace {

InputTuple bits(std::initializer_list<int> v) {
    InputTuple x;
    for (int b : v) x.push_back(Value{b});
    return x;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidArgument;
}

// AND through a random one-time pad: players mask their bit with a private coin, then forward the pad
// in a second noiseless message so player 0 can unmask.
Protocol forwarded_masked_and(int k) {
    Protocol p = make_protocol_shell("forwarded_masked_and", k);
    p.input_space = boolean_cube(k, 1);
    p.programs[0] = [k](const View& v) {
        StepResult r;
        if (v.round < 2) {
            r.wait = others(k, 0);
            return r;
        }
        int a = v.input[0];
        for (int j = 1; j < k; ++j) a &= v.read[static_cast<std::size_t>(j)].at(0).bit(0) ^ v.read[static_cast<std::size_t>(j)].at(1).bit(0);
        r.output = Value{a};
        return r;
    };
    for (int i = 1; i < k; ++i) {
        p.private_rand[static_cast<std::size_t>(i)] = {RandomComponent::uniform("pad", 2)};
        p.programs[static_cast<std::size_t>(i)] = [](const View& v) {
            StepResult r;
            if (v.round == 0) r.send(0, BitString::from_bit(v.input[0] ^ v.rand.priv(0)));
            else {
                r.send(0, BitString::from_bit(v.rand.priv(0)));
                r.output = Value{};
            }
            return r;
        };
    }
    return p;
}

} // namespace

TEST(Rectangularity, Deterministic) {
    for (const Protocol& p : {make_star_and(3), make_star_parity(3, 1), make_ring_private_parity(3), make_silent(3, 1)}) {
        auto r = check_rect_deterministic(p);
        EXPECT_TRUE(r.pass) << p.name;
        EXPECT_GT(r.rhs, 0);
    }
}

TEST(Rectangularity, PublicCoinsNeedPerAtom) {
    Protocol red = reduce_disj_to_and(make_star_disj(4, 2), 2);
    EXPECT_EQ(kind_of([&] { check_rect_deterministic(red); }), ErrorKind::PublicCoinsPresent);
}

TEST(Rectangularity, MixingAgreesWithCounting) {
    for (const Protocol& p : {make_star_and(3), make_ring_private_parity(3), make_noisy_star_parity(3, Probability(1, 8))}) {
        detail::MixTally t;
        detail::rect_by_mixing(p, p.empty_assignment(), "", t);
        auto r = check_rect_deterministic(p);
        EXPECT_EQ(t.ok, t.total) << p.name;
        EXPECT_EQ(static_cast<double>(t.total), r.rhs) << p.name;
    }
}

TEST(Rectangularity, Randomized) {
    for (const Protocol& p : {make_star_and(3), make_star_parity(3, 1), make_ring_private_parity(3), make_padded_star_and(3)})
        EXPECT_TRUE(check_rect_randomized(p).pass) << p.name;
}

TEST(Rectangularity, MuSpecialized) {
    EXPECT_TRUE(check_rect_mu(make_star_and(4)).pass);
    EXPECT_TRUE(check_rect_mu(make_padded_star_and(4)).pass);
}

TEST(Diagonal, StarAndInstance) {
    auto r = check_diagonal(make_star_and(3), bits({0, 0, 0}), bits({1, 1, 1}), 0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 1.0, 1e-9);
    EXPECT_NEAR(r.rhs, 1.0, 1e-9);
    auto same = check_diagonal(make_star_and(3), bits({0, 1, 0}), bits({0, 1, 0}), 1);
    EXPECT_NEAR(same.lhs, 0.0, 1e-9);
    EXPECT_TRUE(same.pass);
}

TEST(Diagonal, AllPairsOnZoo) {
    for (const Protocol& p : {make_star_and(3), make_ring_private_parity(3), make_noisy_star_parity(3, Probability(1, 4))})
        EXPECT_TRUE(check_diagonal_all(p).pass) << p.name;
    EXPECT_TRUE(check_diagonal_mu_all(make_star_and(4)).pass);
}

TEST(Localization, Instances) {
    auto r = check_localization(make_star_and(3), 1, 2);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 1.0, 1e-9);
    EXPECT_NEAR(r.rhs, 1.0, 1e-9);
    EXPECT_EQ(kind_of([] { check_localization(make_star_and(3), 1, 1); }), ErrorKind::InvalidArgument);
    EXPECT_TRUE(check_localization_all(forwarded_masked_and(3)).pass);
}

TEST(HellingerError, Instances) {
    auto r = check_hellinger_error(make_star_and(3), fn_and(3), bits({1, 1, 1}), bits({0, 1, 1}));
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 1.0, 1e-9);
    EXPECT_NEAR(r.rhs, 1 / std::sqrt(2.0), 1e-9);
    EXPECT_EQ(kind_of([] { check_hellinger_error(make_star_and(3), fn_and(3), bits({0, 1, 1}), bits({0, 0, 1})); }),
              ErrorKind::SameFunctionValue);
    Protocol ext = to_external(make_star_parity(3, 1));
    EXPECT_TRUE(check_hellinger_error(ext, fn_parity(3, 1), bits({1, 0, 0}), bits({1, 1, 0})).pass);
    // A protocol with external error 1/2 has a vacuous right-hand side.
    Protocol flip = make_noisy_star_parity(3, Probability(1, 2));
    auto v = check_hellinger_error(flip, fn_parity(3, 1), bits({1, 0, 0}), bits({1, 1, 0}));
    EXPECT_TRUE(v.pass);
}

TEST(CcVsMeasures, WholeZoo) {
    for (const auto& s : zoo_catalog(4, 2))
        for (const auto& r : check_cc_vs_measures(make_zoo(s), natural_dist(s))) EXPECT_TRUE(r.pass) << r.name << " " << r.subject;
}

TEST(SmicAnd, Bounds) {
    auto r4 = check_smic_and_lower_bound(make_star_and(4));
    EXPECT_TRUE(r4.pass);
    EXPECT_NEAR(r4.rhs, 1.0 / 32, 1e-12);
    auto r5 = check_smic_and_lower_bound(make_star_and(5));
    EXPECT_TRUE(r5.pass);
    EXPECT_NEAR(r5.rhs, 4.0 / 96, 1e-12);
    EXPECT_TRUE(check_smic_and_lower_bound(reduce_disj_to_and(make_star_disj(4, 2), 2)).pass);
    EXPECT_EQ(kind_of([] { check_smic_and_lower_bound(make_silent(4, 1)); }), ErrorKind::EpsilonTooLarge);
}

TEST(MicParity, Bounds) {
    auto r3 = check_mic_parity_lower_bound(make_star_parity(3, 1));
    EXPECT_NEAR(r3.lhs, 4.0, 1e-9);
    EXPECT_NEAR(r3.rhs, 2.0, 1e-12);
    auto r4 = check_mic_parity_lower_bound(make_star_parity(4, 1));
    EXPECT_TRUE(r4.pass);
    EXPECT_GE(r4.lhs, 3.0 - 1e-9);
    auto noisy = check_mic_parity_lower_bound(make_noisy_star_parity(3, Probability(1, 4)));
    EXPECT_TRUE(noisy.pass);
    EXPECT_NEAR(noisy.rhs, 2 * (1 - static_cast<double>(binary_entropy(0.25L))), 1e-12);
}

TEST(DirectSum, Mic) {
    auto r = check_direct_sum(DirectSumKind::MIC, make_star_parity(3, 2), 2);
    EXPECT_TRUE(r.pass) << r.detail;
    auto one = check_direct_sum(DirectSumKind::MIC, make_star_parity(3, 1), 1);
    EXPECT_NEAR(one.margin, 0.0, 1e-9);
}

TEST(DirectSum, SmicArityGate) {
    EXPECT_EQ(kind_of([] { check_direct_sum(DirectSumKind::SMIC, make_star_disj(3, 2), 2); }), ErrorKind::ArityTooSmall);
}

TEST(SmicLeMic, Instances) {
    EXPECT_TRUE(check_smic_le_mic(build_joint(make_star_disj(4, 1), dist_mu(4))).pass);
    auto s = check_smic_le_mic(build_joint(make_silent(4, 1), dist_mu(4)));
    EXPECT_TRUE(s.pass);
    EXPECT_NEAR(s.lhs, 0.0, 1e-12);
    EXPECT_TRUE(check_smic_le_mic(build_joint(make_padded_star_and(4), dist_mu(4))).pass);
}

TEST(PicChain, Gates) {
    EXPECT_EQ(kind_of([] { check_pic_ge_half_smic(make_star_and(4), dist_mu(4)); }), ErrorKind::NotProperSynchronous);
    EXPECT_EQ(kind_of([] { check_pic_ge_half_smic(to_proper_synchronous(make_padded_star_and(4)), dist_mu(4)); }),
              ErrorKind::PrivateCoinsPresent);
    for (const auto& r : check_pic_ge_half_smic(to_proper_synchronous(make_silent(4, 1)), dist_mu(4))) {
        EXPECT_TRUE(r.pass) << r.name;
        EXPECT_NEAR(r.lhs, 0.0, 1e-12);
    }
    for (const auto& r : check_pic_ge_half_smic(to_proper_synchronous(make_star_and(4)), dist_mu(4))) EXPECT_TRUE(r.pass) << r.name;
}

TEST(Privacy, RingIsPrivateStarIsNot) {
    for (int k = 3; k <= 4; ++k) EXPECT_TRUE(check_privacy(make_ring_private_parity(k), fn_parity(k, 1)).pass);
    auto r = check_privacy(make_star_parity(3, 1), fn_parity(3, 1));
    EXPECT_FALSE(r.pass);
    ASSERT_FALSE(r.witnesses.empty());
    EXPECT_NE(r.witnesses[0].find("player 1"), std::string::npos);
    Protocol single = make_star_parity(3, 1);
    single.input_space = {bits({0, 1, 0})};
    EXPECT_TRUE(check_privacy(single, fn_parity(3, 1)).pass);
}

TEST(RandomnessBound, Instances) {
    EXPECT_TRUE(check_randomness_bound(make_ring_private_parity(4), fn_parity(4, 1), dist_uniform(4, 1)).pass);
    auto c = check_randomness_bound(make_silent(3, 1), fn_constant(3, Value{0}), dist_uniform(3, 1));
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.lhs, 0.0, 1e-12);
    EXPECT_EQ(kind_of([] { check_randomness_bound(make_star_parity(3, 1), fn_parity(3, 1), dist_uniform(3, 1)); }),
              ErrorKind::NotPrivate);
}

TEST(OutputEntropy, Instances) {
    auto a = check_output_entropy_claim(make_star_parity(3, 1), fn_parity(3, 1), 0, dist_uniform(3, 1));
    EXPECT_TRUE(a.pass);
    EXPECT_NEAR(a.lhs, 0.0, 1e-12);
    EXPECT_TRUE(check_output_entropy_claim(make_star_and(4), fn_and(4), 0, dist_mu(4)).pass);
    auto n = check_output_entropy_claim(make_noisy_star_parity(3, Probability(1, 4)), fn_parity(3, 1), 0, dist_uniform(3, 1));
    EXPECT_TRUE(n.pass);
    EXPECT_NEAR(n.lhs, 0.8112781244591328, 1e-9);
}

TEST(ScheduleIndependence, SmallZoo) {
    for (const auto& s : zoo_catalog(3, 1)) EXPECT_TRUE(check_schedule_independence(make_zoo(s), 20).pass) << s.name;
}

TEST(Suite, FaultInjectedCheckFails) {
    // A check built on a wrong distance must fail loudly, not pass.
    auto p = FiniteDistribution<std::string>({{"a", "a", Probability(1, 2)}, {"b", "b", Probability(1, 2)}});
    auto q = FiniteDistribution<std::string>({{"a", "a", Probability(1)}});
    long double broken_h = hellinger(p, q) / 4;
    EXPECT_FALSE(make_ineq("hellinger_ge_delta", "fault", broken_h, stat_distance(p, q) / std::sqrt(2.0L), "").pass);
}

TEST(Report, JsonShapeAndDeterminism) {
    std::vector<CheckReport> cs{check_privacy(make_ring_private_parity(3), fn_parity(3, 1))};
    std::vector<MeasureReport> ms{mic(build_joint(make_star_parity(3, 1), dist_uniform(3, 1)))};
    auto j1 = make_report({{"x", 1}}, ms, cs).dump();
    cs[0].runtime_ms += 100;
    auto j2 = make_report({{"x", 1}}, ms, cs).dump();
    EXPECT_EQ(j1, j2);
    auto j = nlohmann::json::parse(j1);
    EXPECT_EQ(j["version"], "1");
    EXPECT_EQ(j["measures"][0]["value"], 4.0);
    EXPECT_FALSE(j["checks"][0].contains("runtime_ms"));
    EXPECT_EQ(summary_csv(cs).substr(0, 35), "check,protocol,LHS,RHS,margin,pass\n");
}
