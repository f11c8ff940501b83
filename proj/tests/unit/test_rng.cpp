#include <doctest.h>

#include <cmath>
#include <set>

#include "jmlmc/rng.hpp"

using namespace jmlmc;

TEST_SUITE("rng") {
TEST_CASE("philox known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and children differ") {
    RandomStream a(42);
    RandomStream b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    const RandomStream root(42);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t k = 0; k < 64; ++k) {
        RandomStream c = root.child(k);
        firsts.insert(c.next_u64());
    }
    CHECK(firsts.size() == 64);
    RandomStream x = root.child(3).child(StreamPurpose::field);
    RandomStream y = root.child(3).child(StreamPurpose::field);
    CHECK(x.next_u64() == y.next_u64());
    CHECK(root.child(1).child(2).id() != root.child(2).child(1).id());
}

TEST_CASE("uniform and normal moments") {
    RandomStream s(7);
    const int n = 200000;
    double su = 0.0;
    double sz = 0.0;
    double szz = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = s.normal();
        sz += z;
        szz += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sz / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(szz / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
}
