#include "pcaptopo/filter.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <iterator>

using namespace pcaptopo;
using Index = std::vector<std::size_t>;

namespace {

Index all_of(std::size_t n) {
  Index out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

Index complement(const Index& a, std::size_t n) {
  Index out, all = all_of(n);
  std::set_difference(all.begin(), all.end(), a.begin(), a.end(), std::back_inserter(out));
  return out;
}

Index intersect(const Index& a, const Index& b) {
  Index out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Index unite(const Index& a, const Index& b) {
  Index out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

TEST_CASE("apply_filter matches the brute-force oracle") {
  testsupport::Rng rng(0xF17E);
  for (int round = 0; round < 60; ++round) {
    auto packets = testsupport::synthetic_packets(rng, 1 + rng() % 200, 2 + rng() % 30);
    for (int k = 0; k < 5; ++k) {
      auto t = testsupport::random_expr(rng, packets, 4);
      auto text = testsupport::to_text(*t);
      CAPTURE(text);
      CHECK(apply_filter(packets, *parse_filter(text)) == testsupport::oracle_filter(packets, *t));
    }
  }
}

TEST_CASE("combinators obey the set identities") {
  testsupport::Rng rng(0xA1EB);
  for (int round = 0; round < 60; ++round) {
    auto packets = testsupport::synthetic_packets(rng, 1 + rng() % 200, 2 + rng() % 30);
    const std::size_t n = packets.size();
    auto a = parse_filter(testsupport::to_text(*testsupport::random_expr(rng, packets, 3)));
    auto b = parse_filter(testsupport::to_text(*testsupport::random_expr(rng, packets, 3)));
    auto A = apply_filter(packets, *a);
    auto B = apply_filter(packets, *b);
    CAPTURE(render(*a));
    CAPTURE(render(*b));

    CHECK(apply_filter(packets, *make_not(a)) == complement(A, n));
    CHECK(apply_filter(packets, *make_and(a, b)) == intersect(A, B));
    CHECK(apply_filter(packets, *make_or(a, b)) == unite(A, B));
    CHECK(apply_filter(packets, *make_not(make_and(a, b))) == unite(complement(A, n), complement(B, n)));
    CHECK(apply_filter(packets, *make_not(make_or(a, b))) == intersect(complement(A, n), complement(B, n)));
    CHECK(apply_filter(packets, *make_not(make_not(a))) == A);

    // Idempotence: filtering the filtered subset again changes nothing.
    CHECK(apply_filter(packets, *a, A) == A);
    for (std::size_t i = 0; i < n; ++i) CHECK(evaluate(*make_not(a), packets[i]) == !evaluate(*a, packets[i]));
  }
}
