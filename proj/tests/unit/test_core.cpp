#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "reprobench/config.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/rng.hpp"
#include "reprobench/synthetic.hpp"
#include "reprobench/types.hpp"
#include "test_util.hpp"

using namespace reprobench;

TEST_CASE("rng: keyless stream matches the public splitmix64 sequence") {
  // splitmix64 seeded with 0 yields these first outputs.
  auto rng = CounterRng::from_state(0, 0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next_u64() == 0x06C45D188009454FULL);
}

TEST_CASE("rng: resume from state and stream independence") {
  CounterRng a(7, 3);
  for (int i = 0; i < 10; ++i) a.next_u64();
  auto b = CounterRng::from_state(a.key(), a.counter());
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(CounterRng(7, 3).next_u64() != CounterRng(7, 4).next_u64());
  CHECK(CounterRng(7, 3).next_u64() != CounterRng(8, 3).next_u64());

  CounterRng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_double();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = r.next_open_closed();
    CHECK((v > 0.0 && v <= 1.0));
    CHECK(r.next_below(17) < 17);
  }
}

TEST_CASE("canonical_sort: documented examples") {
  std::vector<ResultEntry> e = {{"b", 0.5}, {"a", 0.5}, {"c", 0.1}};
  const auto s = canonical_sort(e, MetricKind::Distance);
  REQUIRE(s.size() == 3);
  CHECK(s[0].doc_id == "c");
  CHECK(s[1].doc_id == "a");
  CHECK(s[2].doc_id == "b");

  const auto one = canonical_sort({{"a", 1.0}}, MetricKind::InnerProduct);
  CHECK(one == std::vector<ResultEntry>{{"a", 1.0}});

  const auto ip = canonical_sort({{"x", 0.1}, {"y", 0.9}, {"a", 0.1}}, MetricKind::InnerProduct);
  CHECK(testutil::ids_of(ResultList{"q", ip, false}) == std::vector<std::string>{"y", "a", "x"});
}

TEST_CASE("canonical_sort: idempotent and permutation invariant") {
  CounterRng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ResultEntry> e;
    const std::size_t n = 1 + rng.next_below(30);
    for (std::size_t i = 0; i < n; ++i) {
      // Few distinct scores so ties are common.
      e.push_back({"id" + std::to_string(i), static_cast<double>(rng.next_below(5))});
    }
    for (auto metric : {MetricKind::Distance, MetricKind::InnerProduct}) {
      const auto ref = canonical_sort(e, metric);
      CHECK(canonical_sort(ref, metric) == ref);
      auto shuffled = e;
      for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
      CHECK(canonical_sort(shuffled, metric) == ref);
    }
  }
}

TEST_CASE("canonical_sort: rejects non-finite scores") {
  CHECK_THROWS_AS(canonical_sort({{"a", std::nan("")}}, MetricKind::Distance), ValidationError);
  CHECK_THROWS_AS(canonical_sort({{"a", INFINITY}}, MetricKind::Distance), ValidationError);
}

TEST_CASE("EmbeddingMatrix and VectorSet invariants") {
  CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 0, {}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 1, {NAN}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 1, {INFINITY}), ValidationError);
  // 0.1f is not on the FP16 grid.
  CHECK_THROWS_AS(EmbeddingMatrix(1, 1, {0.1f}, Precision::FP16), ValidationError);
  CHECK_NOTHROW(EmbeddingMatrix(1, 2, {0.5f, -2.0f}, Precision::FP16));
  CHECK_THROWS_AS(VectorSet({"a", "a"}, EmbeddingMatrix(2, 1, {1, 2})), ValidationError);
  CHECK_THROWS_AS(VectorSet({"a"}, EmbeddingMatrix(2, 1, {1, 2})), ValidationError);
}

TEST_CASE("padded_id keeps byte order equal to numeric order") {
  CHECK(padded_id('d', 42, 100) == "d000042");
  CHECK(padded_id('q', 0, 1) == "q000000");
  CHECK(padded_id('d', 5, 10000000).size() == 8);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 2000; i += 7) ids.push_back(padded_id('d', i, 2000));
  CHECK(std::is_sorted(ids.begin(), ids.end()));
}

TEST_CASE("config_fingerprint: deterministic, field sensitive, round-trip stable") {
  ExperimentConfig c;
  c.index_params = index_preset("hnsw_accurate");
  c.shard_plan = ShardPlan{4, ShardingStrategy::random(9)};
  CHECK(config_fingerprint(c) == config_fingerprint(c));
  CHECK(config_fingerprint(c).size() == 64);

  ExperimentConfig other = c;
  other.k = 51;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
  other = c;
  other.seed_policy.seed = 43;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
  other = c;
  other.precision = Precision::BF16;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
  other = c;
  other.shard_plan->strategy = ShardingStrategy::hash();
  CHECK(config_fingerprint(other) != config_fingerprint(c));
  other = c;
  other.index_params = HnswParams{32, 200, 127};
  CHECK(config_fingerprint(other) != config_fingerprint(c));

  const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back == c);
  CHECK(config_fingerprint(back) == config_fingerprint(c));

  for (const auto& name : index_preset_names()) {
    ExperimentConfig x;
    x.index_params = index_preset(name);
    CHECK(config_fingerprint(config_from_json(to_json(x))) == config_fingerprint(x));
  }
}

TEST_CASE("sha256 matches the published test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.k = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c.k = 1;
  c.n_runs = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  CHECK_THROWS_AS(validate(IndexParams{HnswParams{1, 10, 10}}), ValidationError);
  CHECK_THROWS_AS(validate(IndexParams{IvfParams{4, 5, 20}}), ValidationError);
  CHECK_THROWS_AS(validate(IndexParams{LshParams{0}}), ValidationError);
  CHECK_THROWS_AS(index_preset("nope"), ValidationError);
  CHECK(index_preset("hnsw") == index_preset("hnsw_fast"));
}

TEST_CASE("seed policy records distinct clock seeds") {
  const auto det = SeedPolicy::deterministic(5);
  CHECK(effective_seed(det, 0) == 5);
  CHECK(effective_seed(det, 3) == 5);
  const auto nd = SeedPolicy::non_deterministic();
  CHECK(effective_seed(nd, 0) != effective_seed(nd, 1));
}

TEST_CASE("gen_synthetic: seeded, unit norm, validated") {
  SyntheticSpec s{42, 100, 10, 8, 4, 0.5};
  const auto [d1, q1] = gen_synthetic(s);
  const auto [d2, q2] = gen_synthetic(s);
  CHECK(d1 == d2);
  CHECK(q1 == q2);
  CHECK(d1.size() == 100);
  CHECK(q1.size() == 10);
  CHECK(d1.ids().front() == "d000000");
  CHECK(q1.ids().back() == "q000009");

  s.seed = 43;
  const auto [d3, q3] = gen_synthetic(s);
  CHECK_FALSE(d3.embeddings().data().size() != d1.embeddings().data().size());
  CHECK(!std::equal(d1.embeddings().data().begin(), d1.embeddings().data().end(),
                    d3.embeddings().data().begin()));

  for (const auto* set : {static_cast<const VectorSet*>(&d1), static_cast<const VectorSet*>(&q1)}) {
    for (std::size_t i = 0; i < set->size(); ++i) {
      double n2 = 0;
      for (float v : set->embeddings().row(i)) n2 += double(v) * v;
      CHECK(std::fabs(std::sqrt(n2) - 1.0) <= 1e-6);
    }
  }

  // Changing the query count leaves documents untouched.
  SyntheticSpec more{42, 100, 20, 8, 4, 0.5};
  CHECK(gen_synthetic(more).first == d1);

  CHECK_THROWS_AS(gen_synthetic({42, 0, 10, 8, 4, 0.5}), ValidationError);
  CHECK_THROWS_AS(gen_synthetic({42, 10, 10, 0, 4, 0.5}), ValidationError);
  CHECK_THROWS_AS(gen_synthetic({42, 10, 10, 8, 11, 0.5}), ValidationError);
}

TEST_CASE("gen_synthetic: one cluster without noise leaves only the id tie-break") {
  const auto [docs, qs] = gen_synthetic({7, 20, 3, 4, 1, 0.0});
  for (std::size_t i = 1; i < docs.size(); ++i) CHECK(docs.embeddings().row(i)[0] == docs.embeddings().row(0)[0]);
}
