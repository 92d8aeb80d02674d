#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/metrics.hpp"
#include "test_util.hpp"

using namespace reprobench;
using testutil::list;

namespace {

std::vector<std::string> random_ids(CounterRng& rng, std::size_t len, std::size_t universe) {
  std::vector<std::string> pool(universe);
  for (std::size_t i = 0; i < universe; ++i) pool[i] = padded_id('d', i, universe);
  for (std::size_t i = universe; i > 1; --i) std::swap(pool[i - 1], pool[rng.next_below(i)]);
  pool.resize(std::min(len, universe));
  return pool;
}

RunRecord run_of(std::vector<ResultList> lists) {
  RunRecord r;
  r.results = std::move(lists);
  return r;
}

}  // namespace

TEST_CASE("jaccard: examples") {
  CHECK(jaccard(IdSet{"a", "b", "c"}, IdSet{"a", "b", "c"}) == 1.0);
  CHECK(jaccard(IdSet{"a", "b", "c"}, IdSet{"a", "b", "d"}) == 0.5);
  CHECK(jaccard(IdSet{"a"}, IdSet{"b"}) == 0.0);
  CHECK(jaccard(IdSet{}, IdSet{}) == 1.0);
}

TEST_CASE("overlap_coefficient: examples") {
  const auto o = overlap_coefficient(list({"a", "b", "c", "d", "e"}), list({"a", "b", "c", "x", "y"}));
  CHECK(o.count == 3);
  CHECK(o.coefficient == doctest::Approx(0.6).epsilon(1e-15));
  const auto same = overlap_coefficient(list({"a", "b"}), list({"a", "b"}));
  CHECK(same.count == 2);
  CHECK(same.coefficient == 1.0);
  CHECK_THROWS_AS(overlap_coefficient(list({}), list({"a"})), ValidationError);
}

TEST_CASE("jaccard and overlap match set oracles on random pairs") {
  CounterRng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(40), 60);
    const auto b = random_ids(rng, 1 + rng.next_below(40), 60);
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    const auto la = list(a), lb = list(b);
    CHECK(jaccard(la, lb) == oracle::jaccard_sets(sa, sb));
    CHECK(jaccard(la, lb) == jaccard(lb, la));
    std::size_t inter = 0;
    for (const auto& x : a) inter += sb.count(x);
    const auto o = overlap_coefficient(la, lb);
    CHECK(o.count == inter);
    CHECK(o.count <= std::min(a.size(), b.size()));
    CHECK(o.coefficient == double(inter) / double(a.size()));
  }
}

TEST_CASE("kendall_tau: examples") {
  CHECK(*kendall_tau(list({"a", "b", "c"}), list({"a", "b", "c"})).tau == 1.0);
  CHECK(*kendall_tau(list({"a", "b", "c"}), list({"c", "b", "a"})).tau == -1.0);
  CHECK(*kendall_tau(list({"a", "b", "c", "d"}), list({"a", "c", "b", "d"})).tau == doctest::Approx(4.0 / 6.0));
  // Only the common subset counts.
  CHECK(*kendall_tau(list({"a", "x", "b"}), list({"a", "b", "y"})).tau == 1.0);
  const auto undefined = kendall_tau(list({"a", "b"}), list({"a", "z"}));
  CHECK_FALSE(undefined.tau.has_value());
  CHECK_FALSE(undefined.p_value.has_value());
  CHECK(undefined.n_common == 1);
}

TEST_CASE("kendall_tau equals the pair-count oracle on every permutation of 5") {
  std::vector<std::string> base = {"a", "b", "c", "d", "e"};
  auto perm = base;
  int cases = 0;
  do {
    const double expect = oracle::kendall_pairs(base, perm);
    CHECK(*kendall_tau(list(base), list(perm)).tau == expect);
    ++cases;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(cases == 120);
}

TEST_CASE("kendall_tau equals the pair-count oracle on random list pairs") {
  CounterRng rng(77);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(50), 70);
    const auto b = random_ids(rng, 1 + rng.next_below(50), 70);
    const double expect = oracle::kendall_pairs(a, b);
    const auto got = kendall_tau(list(a), list(b));
    if (std::isnan(expect)) {
      CHECK_FALSE(got.tau.has_value());
    } else {
      REQUIRE(got.tau.has_value());
      CHECK(*got.tau == expect);
      CHECK(*got.p_value >= 0.0);
      CHECK(*got.p_value <= 1.0);
    }
  }
}

TEST_CASE("kendall_p_value: exact branch matches permutation enumeration") {
  for (std::size_t n = 2; n <= 7; ++n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<long long> stats;
    do {
      long long d = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) d += perm[i] > perm[j];
      }
      stats.push_back(d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const long long pairs = static_cast<long long>(n * (n - 1) / 2);
    for (long long d = 0; d <= pairs; ++d) {
      const long long obs = std::llabs(pairs - 2 * d);
      double extreme = 0;
      for (long long s : stats) extreme += std::llabs(pairs - 2 * s) >= obs;
      CHECK(kendall_p_value(n, static_cast<std::size_t>(d)) ==
            doctest::Approx(std::min(1.0, extreme / double(stats.size()))).epsilon(1e-12));
    }
  }
}

TEST_CASE("kendall_p_value: normal approximation above 10") {
  const std::size_t n = 20;
  const std::size_t d = 40;
  const double pairs = 190.0;
  const double tau = (pairs - 2.0 * d) / pairs;
  const double z = 3.0 * tau * std::sqrt(20.0 * 19.0) / std::sqrt(2.0 * 45.0);
  CHECK(kendall_p_value(n, d) == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(kendall_p_value(n, 95) == doctest::Approx(1.0));
}

TEST_CASE("rbo: examples") {
  CHECK(rbo(list({"a", "b", "c"}), list({"a", "b", "c"}), 0.9, 3) == 1.0);
  CHECK(rbo(list({"a", "b", "c"}), list({"x", "y", "z"}), 0.9, 3) == 0.0);
  // A = (1, 0.5, 1): 0.1 * (1 + 0.45 + 0.81) + 0.729 = 0.955
  CHECK(rbo(list({"x", "y", "z"}), list({"x", "z", "y"}), 0.9, 3) == doctest::Approx(0.955).epsilon(1e-12));
  CHECK_THROWS_AS(rbo(list({"a"}), list({"a"}), 1.0, 1), ValidationError);
  CHECK_THROWS_AS(rbo(list({"a"}), list({"a"}), 0.0, 1), ValidationError);
}

TEST_CASE("rbo equals direct summation on random list pairs") {
  CounterRng rng(5150);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(50), 60);
    const auto b = random_ids(rng, 1 + rng.next_below(50), 60);
    const double p = 0.5 + 0.49 * rng.next_double();
    const std::size_t depth = 1 + rng.next_below(60);
    const double got = rbo(list(a), list(b), p, depth);
    CHECK(std::fabs(got - oracle::rbo_direct(a, b, p, depth)) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    CHECK(rbo(list(a), list(a), p, depth) == 1.0);
  }
}

TEST_CASE("agreement bundles every score") {
  const auto s = agreement(list({"a", "b", "c", "d"}), list({"a", "c", "b", "x"}));
  CHECK(s.overlap_count == 3);
  CHECK(s.overlap_coefficient == 0.75);
  CHECK(s.jaccard == 0.6);
  CHECK(*s.kendall_tau == doctest::Approx(1.0 / 3.0));
  CHECK(s.rbo == doctest::Approx(oracle::rbo_direct({"a", "b", "c", "d"}, {"a", "c", "b", "x"}, 0.9, 4)));
}

TEST_CASE("exact_match_rate") {
  std::vector<ResultList> base;
  for (int q = 0; q < 100; ++q) base.push_back(list({"a", "b", "c"}, "q" + std::to_string(q)));
  std::vector<RunRecord> same(5, run_of(base));
  CHECK(exact_match_rate(same) == 1.0);

  auto changed = base;
  for (int q = 0; q < 20; ++q) changed[q].entries[1].score += 1e-12;
  const std::vector<RunRecord> two = {run_of(base), run_of(changed)};
  CHECK(exact_match_rate(two) == 0.8);

  // Query order does not matter.
  auto reversed = base;
  std::reverse(reversed.begin(), reversed.end());
  const std::vector<RunRecord> reordered = {run_of(base), run_of(reversed)};
  CHECK(exact_match_rate(reordered) == 1.0);

  auto missing = base;
  missing.pop_back();
  const std::vector<RunRecord> bad = {run_of(base), run_of(missing)};
  CHECK_THROWS_AS(exact_match_rate(bad), ValidationError);
  const std::vector<RunRecord> single = {run_of(base)};
  CHECK_THROWS_AS(exact_match_rate(single), ValidationError);
}

TEST_CASE("score_stability") {
  ResultList a{"q", {{"x", 1.0}}, false};
  ResultList b{"q", {{"x", 1.2}}, false};
  const std::vector<RunRecord> two = {run_of({a}), run_of({b})};
  CHECK(score_stability(two)[0] == doctest::Approx(0.1).epsilon(1e-12));
  const std::vector<RunRecord> same = {run_of({a}), run_of({a}), run_of({a})};
  CHECK(score_stability(same)[0] == 0.0);

  ResultList longer{"q", {{"x", 1.0}, {"y", 2.0}}, false};
  const std::vector<RunRecord> uneven = {run_of({a}), run_of({longer})};
  CHECK_THROWS_AS(score_stability(uneven), ValidationError);

  // Against the independent statistics routine.
  CounterRng rng(3);
  std::vector<RunRecord> runs;
  for (int r = 0; r < 4; ++r) {
    ResultList l{"q", {}, false};
    for (int i = 0; i < 6; ++i) l.entries.push_back({"d" + std::to_string(i), rng.next_double()});
    runs.push_back(run_of({l}));
  }
  double expect = 0.0;
  for (int rank = 0; rank < 6; ++rank) {
    std::vector<double> col;
    for (const auto& r : runs) col.push_back(r.results[0].entries[rank].score);
    expect += oracle::stats(col).std;
  }
  CHECK(score_stability(runs)[0] == doctest::Approx(expect / 6.0).epsilon(1e-12));
}

TEST_CASE("vector_l2 and vector_cosine") {
  const std::vector<float> x = {1, 0}, y = {0, 1}, z = {3, 4}, zero = {0, 0};
  CHECK(vector_l2(x, x) == 0.0);
  CHECK(vector_cosine(x, x) == 1.0);
  CHECK(vector_l2(x, y) == doctest::Approx(std::sqrt(2.0)));
  CHECK(vector_cosine(x, y) == 0.0);
  CHECK(vector_l2(z, zero) == 5.0);
  CHECK_THROWS_AS(vector_cosine(z, zero), ValidationError);
  CHECK_THROWS_AS(vector_l2(x, std::vector<float>{1, 2, 3}), ValidationError);
}

TEST_CASE("embedding_drift") {
  const auto m = testutil::random_set(4, 50, 16, 'd').embeddings();
  const auto same = embedding_drift(m, m);
  CHECK(same.mean_l2 == 0.0);
  CHECK(same.mean_cosine == 1.0);

  std::vector<float> neg;
  for (float v : m.data()) neg.push_back(-v);
  const EmbeddingMatrix n(m.rows(), m.dims(), neg);
  double norms = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) norms += 2.0 * std::sqrt(oracle::ip(m.row(i), m.row(i)));
  const auto anti = embedding_drift(m, n);
  CHECK(anti.mean_l2 == doctest::Approx(norms / m.rows()).epsilon(1e-12));
  CHECK(anti.mean_cosine == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(embedding_drift(m, m.slice(0, 10)), ValidationError);
}

TEST_CASE("summarize: examples and oracle") {
  const std::vector<double> ones = {1, 1, 1};
  CHECK(summarize(ones).mean == 1.0);
  CHECK(summarize(ones).std == 0.0);
  const std::vector<double> two = {0, 1};
  const auto d = summarize(two);
  CHECK(d.mean == 0.5);
  CHECK(d.median == 0.5);
  CHECK(d.std == 0.5);
  CHECK(d.n_queries == 2);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), ValidationError);

  CounterRng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng.next_below(100));
    for (auto& x : v) x = rng.next_double() * 3.0 - 1.0;
    const auto got = summarize(v);
    const auto want = oracle::stats(v);
    CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-12));
    CHECK(got.median == want.median);
    CHECK(got.min == want.min);
    CHECK(got.max == want.max);
    CHECK(got.std == doctest::Approx(want.std).epsilon(1e-10));
    CHECK(got.min <= got.median);
    CHECK(got.median <= got.max);
    auto rev = v;
    std::reverse(rev.begin(), rev.end());
    const auto again = summarize(rev);
    CHECK(again.mean == got.mean);
    CHECK(again.std == got.std);
  }
}
