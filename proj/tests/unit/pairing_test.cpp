#include <doctest.h>

#include <map>
#include <set>

#include "twp/peer.hpp"

using namespace twp;

namespace {

// Enumeration oracle: rebuild the full matching of one tick and check it is
// a valid partial matching; collect pairs across a rotation.
std::map<NodeId, NodeId> matching_at(std::size_t n, uint64_t tick) {
  std::map<NodeId, NodeId> match;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = partner_at_tick(static_cast<NodeId>(i), n, tick);
    if (p) match[static_cast<NodeId>(i)] = *p;
  }
  return match;
}

}  // namespace

TEST_CASE("n=2 always pairs (0,1)") {
  for (uint64_t tick = 0; tick < 10; ++tick) {
    CHECK(partner_at_tick(0, 2, tick) == NodeId{1});
    CHECK(partner_at_tick(1, 2, tick) == NodeId{0});
  }
}

TEST_CASE("n=4 produces the classic three matchings") {
  auto m0 = matching_at(4, 0);
  CHECK(m0[1] == 2);
  CHECK(m0[0] == 3);
  auto m1 = matching_at(4, 1);
  CHECK(m1[1] == 3);
  CHECK(m1[0] == 2);
  auto m2 = matching_at(4, 2);
  CHECK(m2[2] == 3);
  CHECK(m2[0] == 1);
}

TEST_CASE("n=3 idles one node per tick and covers all pairs in 3 ticks") {
  std::set<std::pair<NodeId, NodeId>> seen;
  for (uint64_t tick = 0; tick < 3; ++tick) {
    auto match = matching_at(3, tick);
    CHECK(match.size() == 2);  // one node idle
    for (auto [a, b] : match)
      seen.insert({std::min(a, b), std::max(a, b)});
  }
  CHECK(seen == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("schedule is a valid matching covering each pair once per rotation") {
  for (std::size_t n = 2; n <= 64; ++n) {
    std::size_t rotation = (n % 2 == 0) ? n - 1 : n;
    std::map<std::pair<NodeId, NodeId>, std::size_t> meet_count;

    for (uint64_t tick = 0; tick <= 2 * n; ++tick) {
      auto match = matching_at(n, tick);
      for (auto [a, b] : match) {
        CHECK(a != b);
        CHECK(match.count(b) == 1);
        CHECK(match[b] == a);  // symmetry
      }
      if (tick < rotation) {
        for (auto [a, b] : match)
          if (a < b) ++meet_count[{a, b}];
      }
    }
    std::size_t expected_pairs = n * (n - 1) / 2;
    CHECK(meet_count.size() == expected_pairs);
    for (auto& [pair, count] : meet_count) CHECK(count == 1);
  }
}

TEST_CASE("initiator examples") {
  CHECK(initiator_of(0, 1, 3) == 0);
  CHECK(initiator_of(1, 2, 3) == 1);
  CHECK(initiator_of(0, 2, 3) == 2);
  // Even roster, opposite pair: lower id initiates.
  CHECK(initiator_of(0, 2, 4) == 0);
}

TEST_CASE("initiator is unique, symmetric and balanced") {
  for (std::size_t n = 2; n <= 64; ++n) {
    std::vector<std::size_t> initiations(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        NodeId a = initiator_of(static_cast<NodeId>(i),
                                static_cast<NodeId>(j), n);
        NodeId b = initiator_of(static_cast<NodeId>(j),
                                static_cast<NodeId>(i), n);
        CHECK(a == b);
        CHECK((a == i || a == j));
        ++initiations[a];
      }
    }
    auto [lo, hi] = std::minmax_element(initiations.begin(),
                                        initiations.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("initiator_of rejects i == j") {
  CHECK_THROWS_AS(initiator_of(2, 2, 5), SameNodeError);
}
