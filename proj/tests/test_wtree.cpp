#include "doctest.h"

#include <map>
#include <vector>

#include "spinloc/rng.hpp"
#include "spinloc/wtree.hpp"

using namespace spinloc;

namespace {

// Linear prefix-scan oracle over a sorted (key, weight) map.
int oracle_range_search(const std::map<int, double>& m, double ell) {
    double prefix = 0.0;
    for (const auto& [k, w] : m) {
        if (prefix >= ell) return k;
        prefix += w;
    }
    return m.rbegin()->first; // fallback to the maximum key
}

int oracle_select(const std::map<int, double>& m, double u) {
    double cum = 0.0;
    for (const auto& [k, w] : m) {
        cum += w;
        if (u < cum) return k;
    }
    return m.rbegin()->first;
}

} // namespace

TEST_CASE("tree sum on the worked example") {
    WeightedIndexTree t;
    CHECK(t.sum() == 0.0);
    t.update(1, 2.0);
    t.update(2, 3.0);
    t.update(3, 5.0);
    CHECK(t.sum() == doctest::Approx(10.0));
    t.update(2, 7.0);
    CHECK(t.sum() == doctest::Approx(14.0));
}

TEST_CASE("range search on the worked example") {
    WeightedIndexTree t;
    t.update(1, 2.0);
    t.update(2, 3.0);
    t.update(3, 5.0);
    CHECK(t.range_search(0.0) == 1);
    CHECK(t.range_search(2.0) == 2);
    CHECK(t.range_search(4.0) == 3);
}

TEST_CASE("empty tree and missing key errors") {
    WeightedIndexTree t;
    CHECK_THROWS_AS(t.range_search(0.0), EmptyTree);
    CHECK_THROWS_AS(t.select(0.0), EmptyTree);
    CHECK_THROWS_AS(t.erase(3), KeyNotFound);
    t.update(3, 1.0);
    CHECK_THROWS_AS(t.erase(4), KeyNotFound);
    CHECK_THROWS_AS(t.update(5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t.update(5, -1.0), std::invalid_argument);
}

TEST_CASE("insert then delete restores the key/weight multiset") {
    WeightedIndexTree t;
    for (int k = 0; k < 20; k += 2) t.update(k, 1.0 + k);
    std::vector<std::pair<int, double>> before;
    t.for_each([&](int k, double w) { before.emplace_back(k, w); });
    t.update(7, 3.25);
    t.erase(7);
    std::vector<std::pair<int, double>> after;
    t.for_each([&](int k, double w) { after.emplace_back(k, w); });
    CHECK(before == after);
    t.validate();
}

TEST_CASE("update of an absent key inserts it") {
    WeightedIndexTree t;
    t.update(11, 4.0);
    CHECK(t.contains(11));
    CHECK(t.weight(11) == doctest::Approx(4.0));
    t.update(11, 2.0);
    CHECK(t.weight(11) == doctest::Approx(2.0));
    CHECK(t.size() == 1);
}

TEST_CASE("random operations against the shadow map") {
    Rng rng = make_rng(20240811);
    WeightedIndexTree t;
    std::map<int, double> shadow;
    const int universe = 300;
    for (int op = 0; op < 10000; ++op) {
        const int key = uniform_index(rng, universe);
        const double roll = uniform01(rng);
        if (roll < 0.55 || shadow.empty()) {
            // dyadic weights keep every prefix sum exact in both structures
            const double w = (1 + static_cast<int>(uniform01(rng) * 4096)) / 16.0;
            t.update(key, w);
            shadow[key] = w;
        } else if (roll < 0.8) {
            if (shadow.count(key)) {
                t.erase(key);
                shadow.erase(key);
            } else {
                CHECK_THROWS_AS(t.erase(key), KeyNotFound);
            }
        } else {
            REQUIRE(t.size() == shadow.size());
            double s = 0.0;
            for (const auto& [k, w] : shadow) s += w;
            CHECK(t.sum() == doctest::Approx(s).epsilon(1e-12));
            if (!shadow.empty()) {
                const double ell = uniform01(rng) * s;
                CHECK(t.range_search(ell) == oracle_range_search(shadow, ell));
                const double u = uniform01(rng) * s;
                CHECK(t.select(u) == oracle_select(shadow, u));
            }
        }
    }
    t.validate();
}

TEST_CASE("select matches weights in frequency") {
    WeightedIndexTree t;
    t.update(0, 1.0);
    t.update(5, 2.0);
    t.update(9, 7.0);
    Rng rng = make_rng(99);
    int hits[3] = {0, 0, 0};
    const int m = 100000;
    for (int s = 0; s < m; ++s) {
        const int k = t.select(uniform01(rng) * t.sum());
        hits[k == 0 ? 0 : (k == 5 ? 1 : 2)]++;
    }
    CHECK(hits[0] / double(m) == doctest::Approx(0.1).epsilon(0.1));
    CHECK(hits[1] / double(m) == doctest::Approx(0.2).epsilon(0.1));
    CHECK(hits[2] / double(m) == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("logarithmic height under adversarial insert order") {
    WeightedIndexTree t;
    for (int k = 0; k < (1 << 12); ++k) t.update(k, 1.0);
    CHECK(t.height() <= 2 * 12); // AVL bound 1.44 log2
    t.validate();
}
