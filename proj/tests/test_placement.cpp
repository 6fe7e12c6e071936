#include <doctest.h>

#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "ripplekit/error.hpp"
#include "ripplekit/placement.hpp"

using namespace ripplekit;
using testutil::clustered;
using testutil::make_stats;

namespace {

bool is_permutation_of_n(std::span<const NeuronId> order, std::size_t n) {
    std::vector<NeuronId> v(order.begin(), order.end());
    std::sort(v.begin(), v.end());
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] != k) return false;
    }
    return v.size() == n;
}

std::vector<NeuronId> as_vector(const Placement& p) { return {p.order().begin(), p.order().end()}; }

}  // namespace

TEST_CASE("distance examples") {
    const auto s = make_stats(3, {{0, 1, 4}, {1, 2, 1}});
    CHECK(neuron_distance(s, 0, 2) == 1.0);
    CHECK(neuron_distance(s, 0, 1) < neuron_distance(s, 1, 2));
    CHECK(neuron_distance(s, 1, 2) < neuron_distance(s, 0, 2));
    CHECK(neuron_distance(s, 0, 1) == doctest::Approx(1.0 - 4.0 / 10.0));
    CHECK(neuron_distance(s, 1, 0) == neuron_distance(s, 0, 1));

    const auto zero = make_stats(3, {});
    CHECK(neuron_distance(zero, 0, 1) == 1.0);
}

TEST_CASE("the most co-activated pair is the closest") {
    std::mt19937_64 rng(1);
    const auto s = testutil::random_stats(12, rng, 50);
    PairCount best{};
    for (const auto& p : s.pairs()) {
        if (p.count > best.count) best = p;
    }
    for (NeuronId i = 0; i < 12; ++i) {
        for (NeuronId j = i + 1; j < 12; ++j) {
            if (s.pair_freq(i, j) < best.count) {
                CHECK(neuron_distance(s, i, j) > neuron_distance(s, best.i, best.j));
            }
        }
    }
}

TEST_CASE("link distance") {
    const auto s = make_stats(4, {{1, 2, 3}});
    CHECK(link_distance({0, 0}, {3, 3}, s) == neuron_distance(s, 0, 3));
    CHECK(link_distance({0, 1}, {2, 3}, s) == doctest::Approx(1.0 - 0.5));
    CHECK_THROWS_AS(link_distance({0, 1}, {1, 3}, s), Error);

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto r = testutil::random_stats(6, rng, 4);
        std::vector<NeuronId> ids{0, 1, 2, 3, 4, 5};
        std::shuffle(ids.begin(), ids.end(), rng);
        const LinkEnds a{ids[0], ids[1]}, b{ids[2], ids[3]};
        CHECK(link_distance(a, b, r) == oracle::link_distance(ids[0], ids[1], ids[2], ids[3], r));
    }
}

TEST_CASE("greedy trivial sizes") {
    CHECK(as_vector(greedy_search(make_stats(1, {}))) == std::vector<NeuronId>{0});
    CHECK(as_vector(greedy_search(make_stats(2, {}))) == std::vector<NeuronId>{0, 1});
    CHECK(as_vector(greedy_search(make_stats(2, {{0, 1, 3}}))) == std::vector<NeuronId>{0, 1});
}

TEST_CASE("all-zero stats give a valid order at the common cost") {
    const auto s = make_stats(9, {});
    const Placement p = greedy_search(s);
    CHECK(is_permutation_of_n(p.order(), 9));
    CHECK(path_cost(s, p) == doctest::Approx(8.0));
    CHECK(path_cost(s, Placement::shuffled(9, 4)) == doctest::Approx(8.0));
    CHECK(p == greedy_search(s));
}

TEST_CASE("greedy equals an enumerating priority-queue oracle") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::uint32_t>(rng() % 25 + 1);
        const auto s = testutil::random_stats(n, rng, rng() % 2 ? 3 : 40);
        CAPTURE(trial);
        CHECK(as_vector(greedy_search(s)) == oracle::greedy_order(s));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = extract_stats(
            generate_clustered_trace(clustered(60, 80, 0.1, 4, 0.8, static_cast<std::uint64_t>(trial))));
        CHECK(as_vector(greedy_search(s)) == oracle::greedy_order(s));
    }
}

TEST_CASE("greedy search bookkeeping") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<std::uint32_t>(rng() % 40 + 2);
        const auto s = testutil::random_stats(n, rng, rng() % 3);
        SearchTrace tr;
        const Placement p = greedy_search(s, &tr);
        CHECK(is_permutation_of_n(p.order(), n));
        CHECK(tr.unions == n - 1);
        CHECK(tr.links.size() == n - 1);
        CHECK(tr.max_neighbor_count <= 2);
        std::set<std::pair<NeuronId, NeuronId>> linked;
        for (auto [a, b] : tr.links) linked.insert({std::min(a, b), std::max(a, b)});
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const NeuronId a = p.at(static_cast<Position>(k)), b = p.at(static_cast<Position>(k + 1));
            CHECK(linked.count({std::min(a, b), std::max(a, b)}) == 1);
        }
    }
}

TEST_CASE("scaling all counts leaves the order unchanged") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = testutil::random_stats(static_cast<std::uint32_t>(rng() % 30 + 2), rng, 6);
        const Placement p = greedy_search(s);
        for (std::uint64_t k : {2u, 7u, 1000u}) CHECK(greedy_search(s.scaled(k)) == p);
    }
}

TEST_CASE("seven-neuron clustered stats sit between the optimum and random orders") {
    const auto s = extract_stats(generate_clustered_trace(clustered(7, 300, 0.45, 2, 0.9, 31)));
    const double greedy = path_cost(s, greedy_search(s));
    const double best = path_cost(s, brute_force_optimal(s));
    double random_mean = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) random_mean += path_cost(s, Placement::shuffled(7, k));
    random_mean /= 1000.0;
    CHECK(greedy >= best - 1e-12);
    CHECK(greedy <= random_mean);
}

TEST_CASE("brute force optimum") {
    CHECK(as_vector(brute_force_optimal(make_stats(2, {}))) == std::vector<NeuronId>{0, 1});
    const auto s = make_stats(3, {{0, 1, 5}, {1, 2, 5}, {0, 2, 1}});
    CHECK(as_vector(brute_force_optimal(s)) == std::vector<NeuronId>{0, 1, 2});
    CHECK_THROWS_AS(brute_force_optimal(make_stats(11, {})), Error);

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = testutil::random_stats(8, rng, 9);
        const Placement opt = brute_force_optimal(r);
        CHECK(path_cost(r, opt) <= path_cost(r, greedy_search(r)) + 1e-12);
        // Exhaustive enumeration with the oracle cost.
        std::vector<NeuronId> order(8);
        std::iota(order.begin(), order.end(), 0);
        double best = 1e9;
        do {
            best = std::min(best, oracle::path_cost(r, order));
        } while (std::next_permutation(order.begin(), order.end()));
        CHECK(path_cost(r, opt) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("path cost and adjacent counts agree") {
    std::mt19937_64 rng(14);
    const auto s = testutil::random_stats(15, rng, 8);
    const Placement p = Placement::shuffled(15, 3);
    const double expected = 14.0 - static_cast<double>(adjacent_pair_count(s, p)) /
                                       (2.0 * static_cast<double>(s.pair_total()));
    CHECK(path_cost(s, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(path_cost(s, p) == doctest::Approx(oracle::path_cost(s, p.order())).epsilon(1e-12));
}

TEST_CASE("expected-I/O estimate") {
    const auto zero = make_stats(5, {});
    const CoActivationStats singles(5, 3, {1, 2, 0, 3, 1}, {});
    const auto e0 = evaluate_expected_ops(singles, Placement::identity(5));
    CHECK(e0.adjacency_gain == 0.0);
    CHECK(e0.expected_ops_coactivated == e0.expected_ops_individual);
    CHECK_THROWS_AS(evaluate_expected_ops(zero, Placement::identity(5)), Error);
    CHECK_THROWS_AS(evaluate_expected_ops(singles, Placement::identity(4)), Error);

    // Pair total 11: gain = 2 (5 + 5) / 22.
    const auto s = make_stats(3, {{0, 1, 5}, {1, 2, 5}, {0, 2, 1}});
    const auto e = evaluate_expected_ops(s, Placement::from_order({0, 1, 2}));
    CHECK(e.adjacency_gain == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
    CHECK(e.adjacency_gain ==
          doctest::Approx(2.0 * (prob_pair(s, 0, 1) + prob_pair(s, 1, 2))).epsilon(1e-12));
    CHECK(e.expected_ops_individual == doctest::Approx(1.0));

    const auto c = extract_stats(generate_clustered_trace(clustered(200, 400, 0.1, 8, 0.9, 15)));
    CHECK(evaluate_expected_ops(c, greedy_search(c)).adjacency_gain >=
          evaluate_expected_ops(c, Placement::identity(200)).adjacency_gain);
}

TEST_CASE("well-separated clusters end up contiguous") {
    const auto spec = clustered(200, 2000, 0.1, 10, 1.0, 17);
    const auto s = extract_stats(generate_clustered_trace(spec));
    const Placement p = greedy_search(s);
    for (const auto& c : cluster_partition(spec)) CHECK(count_extents(p, c) == 1);
}

TEST_CASE("extent counting") {
    const Placement p = Placement::shuffled(30, 5);
    std::vector<NeuronId> all(30);
    std::iota(all.begin(), all.end(), 0);
    CHECK(count_extents(p, all) == 1);
    CHECK(count_extents(p, {}) == 0);
    std::vector<NeuronId> alternating;
    for (Position q = 0; q < 30; q += 2) alternating.push_back(p.at(q));
    CHECK(count_extents(p, alternating) == alternating.size());

    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<NeuronId> ids;
        for (NeuronId id = 0; id < 30; ++id) {
            if (rng() % 3 == 0) ids.push_back(id);
        }
        if (!ids.empty() && rng() % 2) ids.push_back(ids.front());
        std::shuffle(ids.begin(), ids.end(), rng);
        CHECK(count_extents(p, ids) == oracle::extent_scan(p, ids));
    }
}

TEST_CASE("placement basics") {
    CHECK_THROWS_AS(Placement::from_order({0, 2}), Error);
    CHECK_THROWS_AS(Placement::from_order({1, 1}), Error);
    const Placement p = Placement::from_order({2, 0, 1});
    CHECK(p.position_of(2) == 0);
    CHECK(p.position_of(1) == 2);
    CHECK(as_vector(p.reversed()) == std::vector<NeuronId>{1, 0, 2});
    CHECK(Placement::shuffled(100, 9) == Placement::shuffled(100, 9));
    CHECK_FALSE(Placement::shuffled(100, 9) == Placement::shuffled(100, 10));
    CHECK(is_permutation_of_n(Placement::shuffled(100, 9).order(), 100));

    std::stringstream buf;
    write_placement(p, 7, buf);
    const PlacementFile f = read_placement(buf);
    CHECK(f.layer_id == 7);
    CHECK(f.placement == p);
    std::istringstream bad(R"({"layer_id":0,"neuron_count":3,"order":[0,1,1]})");
    CHECK_THROWS_AS(read_placement(bad), Error);
}
