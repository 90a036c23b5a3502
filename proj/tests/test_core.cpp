#include <gtest/gtest.h>

#include "p2pic/p2pic.hpp"

using namespace p2pic;

namespace {

RandomAssignment no_coins(const Protocol& p) { return full_assignment(p, std::vector<std::vector<int>>(static_cast<std::size_t>(p.k)), {}); }

InputTuple bits(std::initializer_list<int> v) {
    InputTuple x;
    for (int b : v) x.push_back(Value{b});
    return x;
}

} // namespace

TEST(BitString, RoundTrips) {
    auto b = BitString::from_uint(5, 4);
    EXPECT_EQ(b.str(), "0101");
    EXPECT_EQ(b.to_uint(), 5u);
    EXPECT_EQ(BitString::from_hex(b.to_hex()), b);
    EXPECT_TRUE(BitString("01").is_prefix_of(BitString("011")));
    EXPECT_FALSE(BitString("011").is_prefix_of(BitString("01")));
    EXPECT_THROW(BitString("012"), Error);
}

TEST(Execute, StarParityHandSimulation) {
    Protocol p = make_star_parity(3, 1);
    auto r = execute(p, bits({1, 0, 1}), no_coins(p));
    ASSERT_TRUE(r.outputs[0].has_value());
    EXPECT_EQ(*r.outputs[0], Value{0});
    EXPECT_EQ(Transcript::seq_key(r.transcript.read[0][1]), "0");
    EXPECT_EQ(Transcript::seq_key(r.transcript.read[0][2]), "1");

    auto z = execute(p, bits({0, 0, 0}), no_coins(p));
    EXPECT_EQ(*z.outputs[0], Value{0});
    EXPECT_EQ(z.transcript.read[0][1].at(0).str(), "0");
}

TEST(Execute, StarParityOddInput) {
    Protocol p = make_star_parity(3, 1);
    EXPECT_EQ(*execute(p, bits({1, 1, 1}), no_coins(p)).outputs[0], Value{1});
}

TEST(Execute, RandomSchedulesAgreeOnStarDisj) {
    Protocol p = make_star_disj(4, 2);
    InputTuple x{{1, 0}, {0, 1}, {1, 1}, {0, 1}};
    auto ref = execute(p, x, no_coins(p));
    for (std::uint64_t s = 0; s < 50; ++s) {
        Schedule sch = Schedule::random(s);
        auto r = execute(p, x, no_coins(p), sch);
        EXPECT_EQ(r.transcript, ref.transcript);
        EXPECT_EQ(r.outputs, ref.outputs);
    }
}

TEST(Execute, StarDisjCoordinateAllOnes) {
    Protocol p = make_star_disj(4, 2);
    InputTuple x{{0, 1}, {0, 1}, {1, 1}, {0, 1}};
    EXPECT_EQ(*execute(p, x, no_coins(p)).outputs[0], Value{1});
}

TEST(Execute, NeverHaltingRaisesRoundBound) {
    Protocol p = make_silent(3, 1);
    p.programs[1] = [](const View&) { return StepResult{}; };
    try {
        execute(p, bits({0, 0, 0}), no_coins(p));
        FAIL() << "expected RoundBoundExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RoundBoundExceeded);
    }
    auto rep = validate_protocol(p);
    EXPECT_FALSE(rep.valid);
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_EQ(rep.violations[0].kind, "RoundBoundExceeded");
}

TEST(Execute, WaitingOnSilentPeerDeadlocks) {
    Protocol p = make_silent(3, 1);
    p.programs[0] = [](const View& v) {
        StepResult r;
        if (v.round == 0) r.wait = {1};
        else r.output = Value{0};
        return r;
    };
    try {
        execute(p, bits({0, 0, 0}), no_coins(p));
        FAIL() << "expected Deadlock";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Deadlock);
    }
}

TEST(CommunicationCost, Basics) {
    EXPECT_EQ(communication_cost(make_star_parity(4, 3)), 9u);
    EXPECT_EQ(communication_cost(make_silent(3, 1)), 0u);
    EXPECT_EQ(communication_cost(make_permutation(4)), 4u);
}

TEST(CommunicationCost, ExternalDoublesPlusTwo) {
    for (const auto& s : zoo_catalog(4, 1)) {
        Protocol p = make_zoo(s);
        EXPECT_EQ(communication_cost(to_external(p)), 2 * communication_cost(p) + 2) << p.name;
    }
}

TEST(Validate, ZooAndTransformsAreValid) {
    for (const auto& s : zoo_catalog(4, 2)) {
        Protocol p = make_zoo(s);
        auto rep = validate_protocol(p);
        EXPECT_TRUE(rep.valid) << p.name << ": " << (rep.violations.empty() ? "" : rep.violations[0].detail);
        EXPECT_TRUE(validate_protocol(to_external(p)).valid) << p.name;
    }
    EXPECT_TRUE(validate_protocol(to_proper_synchronous(make_star_and(4))).valid);
    EXPECT_TRUE(validate_protocol(embed_direct_sum(make_star_parity(3, 2), dist_uniform(3, 1), 2)).valid);
}

TEST(Validate, PrefixViolationDetected) {
    Protocol p = make_star_parity(3, 1);
    p.programs[1] = [](const View& v) {
        StepResult r;
        r.send(0, v.input[0] ? BitString("01") : BitString("0"));
        r.output = Value{};
        return r;
    };
    auto rep = validate_protocol(p);
    EXPECT_FALSE(rep.valid);
    bool found = false;
    for (const auto& v : rep.violations) found = found || v.kind == "PrefixViolation";
    EXPECT_TRUE(found);
}

TEST(AsyncDemo, SameTranscriptsDifferentArrivals) {
    AsyncLeakDemo d = demo_general_async_leak();
    EXPECT_TRUE(d.transcripts_identical);
    EXPECT_TRUE(d.orders_differ);
    ASSERT_FALSE(d.run0.arrival_order_at_b.empty());
    EXPECT_EQ(d.run0.arrival_order_at_b.front(), 2);
    EXPECT_EQ(d.run1.arrival_order_at_b.front(), 3);
    for (const auto& [link, s] : d.run0.link_transcript)
        for (char c : s) EXPECT_EQ(c, '0');
    EXPECT_EQ(d.run0.total_bits, d.run1.total_bits);
}

TEST(Zoo, PermutationFollowsSuccessor) {
    Protocol p = make_permutation(3);
    InputTuple x = make_permutation_input({1, 0, 1}, {0, 1, 2});
    auto r = execute(p, x, no_coins(p));
    EXPECT_EQ(*r.outputs[0], Value{0});
    EXPECT_EQ(*r.outputs[1], Value{1});
    EXPECT_EQ(*r.outputs[2], Value{1});
    EXPECT_THROW(make_permutation_input({1, 0, 1}, {0, 0, 2}), Error);
    InputTuple broken = x;
    broken[0][2] = 2;
    EXPECT_THROW(check_permutation_promise(broken), Error);
}

TEST(Zoo, RingHandSimulation) {
    Protocol p = make_ring_private_parity(3);
    auto a = full_assignment(p, {{0}, {}, {}}, {});
    auto r = execute(p, bits({1, 0, 1}), a);
    EXPECT_EQ(*r.outputs[0], Value{0});
    EXPECT_EQ(r.transcript.sent[0][1].at(0).str(), "1");
    EXPECT_EQ(r.transcript.sent[1][2].at(0).str(), "1");
    EXPECT_EQ(r.transcript.sent[2][0].at(0).str(), "0");
}

TEST(Zoo, ErrorRates) {
    EXPECT_EQ(error_rate(make_star_parity(3, 1), fn_parity(3, 1), boolean_cube(3, 1)).eps, 0);
    EXPECT_EQ(error_rate(make_silent(3, 1), fn_parity(3, 1), boolean_cube(3, 1)).eps, 1);
    EXPECT_EQ(error_rate(make_noisy_star_parity(3, Probability(1, 4)), fn_parity(3, 1), boolean_cube(3, 1)).eps, Probability(1, 4));
}

TEST(Transforms, ProperSynchronousRounds) {
    Protocol ps = to_proper_synchronous(make_star_and(4));
    int tf = 0;
    ASSERT_TRUE(is_proper_synchronous(ps, &tf));
    for (const auto& x : ps.input_space)
        for_each_path(ps, x, [&](const RandomAssignment&, const Probability&, const ExecutionResult& r) {
            for (int i = 0; i < ps.k; ++i) EXPECT_EQ(r.rounds[static_cast<std::size_t>(i)], tf);
            EXPECT_EQ(r.outputs[0], Value{x[0][0] & x[1][0] & x[2][0] & x[3][0]});
        });
    EXPECT_FALSE(is_proper_synchronous(make_star_and(4)));
}

TEST(Transforms, ExternalIsDecodable) {
    Protocol p = to_external(make_star_parity(3, 1));
    EXPECT_EQ(best_external_decoder(p, fn_parity(3, 1), p.input_space).eps, 0);
    EXPECT_EQ(error_rate(p, fn_parity(3, 1), p.input_space).eps, 0);
}

TEST(Transforms, DoubleBits) {
    EXPECT_EQ(double_bits(BitString("10")).str(), "1100");
    EXPECT_EQ(undouble_bits(BitString("1100")).str(), "10");
}

TEST(Transforms, EmbedPreservesError) {
    Protocol pi = make_star_parity(3, 2);
    Protocol e = embed_direct_sum(pi, dist_uniform(3, 1), 2);
    EXPECT_EQ(error_rate(e, fn_parity(3, 1), boolean_cube(3, 1)).eps, 0);
    EXPECT_THROW(embed_direct_sum(pi, dist_mu(3), 2), Error);
}

TEST(Transforms, ReductionArityGate) {
    try {
        reduce_disj_to_and(make_star_disj(3, 2), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ArityTooSmall);
    }
}

TEST(Transforms, ReductionIsZeroError) {
    Protocol red = reduce_disj_to_and(make_star_disj(4, 2), 2);
    EXPECT_EQ(error_rate(red, fn_and(4), red.input_space).eps, 0);
    EXPECT_TRUE(validate_protocol(red).valid);
}

TEST(Encoding, PrefixFreeComponents) {
    Transcript t = Transcript::empty(2);
    t.sent[0][1].push_back(BitString("1"));
    EXPECT_EQ(encode_component(t.sent[0][1]), "1101");
    Transcript e = Transcript::empty(3);
    EXPECT_EQ(prefix_free_encode(e, 0), "01010101");
}

TEST(Encoding, InjectiveAndShannonBound) {
    for (const auto& s : zoo_catalog(4, 1)) {
        Protocol p = make_zoo(s);
        InputDistribution d = natural_dist(s);
        for (int i = 0; i < p.k; ++i) {
            std::map<std::string, std::string> enc; // Pi_i key -> encoding
            std::map<std::string, Probability> law;
            Probability expected_len = 0;
            for (const auto& a : d.atoms())
                for_each_path(p, a.value.x, [&](const RandomAssignment&, const Probability& pr, const ExecutionResult& r) {
                    std::string key = r.transcript.player_key(i);
                    std::string code = prefix_free_encode(r.transcript, i);
                    auto [it, fresh] = enc.emplace(key, code);
                    EXPECT_EQ(it->second, code);
                    law[code] += a.p * pr;
                    expected_len += a.p * pr * static_cast<long long>(code.size());
                });
            std::set<std::string> codes;
            for (const auto& [k, c] : enc) codes.insert(c);
            EXPECT_EQ(codes.size(), enc.size()) << p.name;
            long double h = 0;
            for (const auto& [c, pr] : law) {
                long double v = to_long_double(pr);
                h -= v * std::log2(v);
            }
            EXPECT_LE(h, to_long_double(expected_len) + 1e-9) << p.name;
        }
    }
}
