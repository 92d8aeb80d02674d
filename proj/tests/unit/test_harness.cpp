#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/harness.hpp"
#include "reprobench/io.hpp"
#include "test_util.hpp"

using namespace reprobench;

namespace {

ExperimentConfig cfg(const std::string& preset, std::size_t k, std::size_t runs) {
  ExperimentConfig c;
  c.index_params = index_preset(preset);
  c.k = k;
  c.n_runs = runs;
  return c;
}

}  // namespace

TEST_CASE("run_repeated: fixed seed gives perfect agreement") {
  const auto [docs, qs] = gen_synthetic({1, 600, 12, 16, 8, 0.5});
  for (const auto& name : {"flat_l2", "ivf", "hnsw_fast", "lsh"}) {
    const auto rep = run_repeated(cfg(name, 10, 3), docs, qs);
    REQUIRE(rep.cells.size() == 1);
    const auto& c = rep.cells[0];
    CHECK(c.name == name);
    CHECK(c.scalars.at("emr") == 1.0);
    CHECK(c.metrics.at("jaccard").summary->min == 1.0);
    CHECK(c.metrics.at("kendall_tau").summary->min == 1.0);
    CHECK(c.metrics.at("score_stability").summary->max == 0.0);
    CHECK(c.metrics.at("exact_match").raw.size() == qs.size());
    CHECK(rep.query_ids == qs.ids());
    if (std::string(name) == "ivf") CHECK(c.scalars.at("centroid_stability") == 0.0);
  }
  CHECK_THROWS_AS(run_repeated(cfg("flat_l2", 10, 1), docs, qs), ValidationError);
}

TEST_CASE("run_repeated: inputs are not modified") {
  const auto [docs, qs] = gen_synthetic({2, 300, 6, 8, 4, 0.5});
  const auto fd = vector_set_fingerprint(docs), fq = vector_set_fingerprint(qs);
  auto c = cfg("hnsw_fast", 5, 2);
  c.precision = Precision::BF16;
  run_repeated(c, docs, qs);
  CHECK(vector_set_fingerprint(docs) == fd);
  CHECK(vector_set_fingerprint(qs) == fq);
}

TEST_CASE("metric summaries match the statistics oracle") {
  const auto [docs, qs] = gen_synthetic({3, 500, 20, 8, 4, 0.5});
  auto c = cfg("lsh", 10, 3);
  c.seed_policy = SeedPolicy::non_deterministic();
  const auto rep = run_repeated(c, docs, qs);
  for (const auto& [name, series] : rep.cells[0].metrics) {
    std::vector<double> v;
    for (const auto& x : series.raw) if (x) v.push_back(*x);
    CHECK(series.exclusions == series.raw.size() - v.size());
    if (v.empty()) continue;
    const auto want = oracle::stats(v);
    CHECK(series.summary->mean == doctest::Approx(want.mean).epsilon(1e-12));
    CHECK(series.summary->std == doctest::Approx(want.std).epsilon(1e-9));
    CHECK(series.summary->median == doctest::Approx(want.median).epsilon(1e-12));
    CHECK(series.summary->n_queries == v.size());
  }
}

TEST_CASE("make_series counts exclusions") {
  const auto s = make_series({1.0, std::nullopt, 3.0});
  CHECK(s.exclusions == 1);
  CHECK(s.summary->mean == 2.0);
  CHECK_FALSE(make_series({std::nullopt}).summary.has_value());
}

TEST_CASE("scenario_stability names cells by preset and is parallel-invariant") {
  const auto [docs, qs] = gen_synthetic({4, 500, 8, 8, 4, 0.5});
  const std::vector<std::string> presets = {"flat_l2", "ivf", "hnsw_accurate"};
  const auto a = scenario_stability(presets, cfg("flat_l2", 5, 2), docs, qs);
  const auto b = scenario_stability(presets, cfg("flat_l2", 5, 2), docs, qs, {2, true});
  CHECK(a.cells.size() == 3);
  CHECK(a.cell("hnsw_accurate").scalars.at("emr") == 1.0);
  CHECK(redact_metadata(report_to_json(a)) == redact_metadata(report_to_json(b)));
  CHECK_THROWS_AS(a.cell("nope"), ValidationError);
}

TEST_CASE("insertion: flat survivors keep their order") {
  const auto [docs, qs] = gen_synthetic({5, 1000, 20, 16, 8, 0.5});
  const auto rep = scenario_insertion(FlatL2Params{}, docs, 0.8, qs, 20, 42);
  const auto& c = rep.cells[0];
  for (const auto& t : c.metrics.at("kendall_tau").raw) {
    if (t) CHECK(*t == 1.0);
  }
  for (const auto& o : c.metrics.at("overlap_coefficient").raw) CHECK((*o >= 0.0 && *o <= 1.0));

  CHECK_THROWS_AS(scenario_insertion(FlatL2Params{}, docs, 0.0, qs, 20, 42), ValidationError);
  CHECK_THROWS_AS(scenario_insertion(FlatL2Params{}, docs, 1.0, qs, 20, 42), ValidationError);
  CHECK_THROWS_AS(scenario_insertion(FlatL2Params{}, docs.slice(0, 1), 0.5, qs, 20, 42), ValidationError);
}

TEST_CASE("insertion: far documents leave results unchanged") {
  const auto [base, qs] = gen_synthetic({6, 200, 10, 8, 4, 0.5});
  std::vector<std::string> ids = base.ids();
  std::vector<float> v(base.embeddings().data().begin(), base.embeddings().data().end());
  for (int i = 0; i < 50; ++i) {
    ids.push_back("z" + std::to_string(100 + i));
    for (int j = 0; j < 8; ++j) v.push_back(100.0f + static_cast<float>(i));
  }
  const DocumentCorpus docs(ids, EmbeddingMatrix(250, 8, v));
  const auto rep = scenario_insertion(FlatL2Params{}, docs, 0.8, qs, 10, 1);
  const auto& c = rep.cells[0];
  CHECK(c.metrics.at("overlap_coefficient").summary->min == 1.0);
  CHECK(c.metrics.at("rbo").summary->min == doctest::Approx(1.0));
  CHECK(c.metrics.at("overlap_count").summary->min == 10.0);
}

TEST_CASE("cross embedding: identical spaces agree fully") {
  const auto space = gen_synthetic({7, 300, 10, 16, 8, 0.5});
  const auto rep = scenario_cross_embedding(space, space, 10);
  const auto& c = rep.cell("a_vs_b");
  for (const char* m : {"overlap_coefficient", "jaccard", "rbo", "kendall_tau"}) {
    CHECK(c.metrics.at(m).summary->min == doctest::Approx(1.0));
  }
}

TEST_CASE("cross embedding: unrelated spaces overlap near chance") {
  const std::size_t n = 2000, k = 10, nq = 200;
  auto a = gen_synthetic({8, n, nq, 16, 1, 1.0});
  auto b = gen_synthetic({9, n, nq, 16, 1, 1.0});
  const auto rep = scenario_cross_embedding(a, b, k);
  const auto& s = *rep.cell("a_vs_b").metrics.at("overlap_coefficient").summary;
  // Each query's overlap is hypergeometric with mean k/n.
  const double p = double(k) / n;
  const double sigma = std::sqrt(p * (1 - p) / (double(k) * nq));
  CHECK(std::fabs(s.mean - p) <= 3 * sigma + 1e-12);
}

TEST_CASE("cross embedding validation") {
  const auto a = gen_synthetic({10, 50, 5, 8, 4, 0.5});
  const auto b = gen_synthetic({11, 60, 5, 8, 4, 0.5});
  CHECK_THROWS_AS(scenario_cross_embedding(a, b, 5), ValidationError);
  CHECK_THROWS_AS(scenario_cross_embedding(a, a, 0), ValidationError);
}

TEST_CASE("precision scenario cells") {
  PrecisionScenarioSpec spec;
  spec.rows = 50;
  spec.dims = 64;
  spec.n_runs = 2;
  const auto rep = scenario_precision(spec);
  for (Precision p : kAllPrecisions) {
    const std::string f(to_string(p));
    CHECK(rep.cell(f + "-det").labels.at("reproducible") == "yes");
    CHECK(rep.cell(f + "-non-det").labels.at("reproducible") == "yes");
    CHECK(rep.cell(f + "-det").scalars.at("mean_l2") == 0.0);
    CHECK(rep.cell(f + "-det-vs-non-det").labels.at("result") == "identical");
  }
  REQUIRE(rep.drift.has_value());
  CHECK(rep.drift->l2[0][2] > rep.drift->l2[0][1]);
  CHECK(rep.metadata.contains("latency"));
}

TEST_CASE("distributed scenario small matrix") {
  const auto [docs, qs] = gen_synthetic({12, 400, 6, 8, 4, 0.5});
  DistributedScenarioSpec spec;
  spec.k = 10;
  spec.n_nodes = 3;
  spec.n_runs = 2;
  spec.indexes = {"flat_l2", "lsh"};
  const auto rep = scenario_distributed(docs, qs, spec);
  CHECK(rep.cells.size() == 6);
  for (const auto& c : rep.cells) {
    CHECK(c.scalars.at("emr") == 1.0);
    if (c.name.rfind("flat_l2", 0) == 0) CHECK(c.labels.at("exact_single_node") == "pass");
  }
  CHECK(rep.fingerprints.size() == 6 + 2);
  CHECK(rep.fingerprints.back() == vector_set_fingerprint(qs));
  const auto par = scenario_distributed(docs, qs, spec, {1, true});
  CHECK(redact_metadata(report_to_json(rep)) == redact_metadata(report_to_json(par)));
  spec.n_nodes = 1;
  CHECK_THROWS_AS(scenario_distributed(docs, qs, spec), ValidationError);
}

TEST_CASE("insertion size presets") {
  CHECK(insertion_size_preset("desk").n_docs == 10000);
  CHECK(insertion_size_preset("s1").n_docs == 9900);
  CHECK_THROWS_AS(insertion_size_preset("huge"), ValidationError);
}
