// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance_tests <path-to-reprobench-cli>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reprobench/distributed.hpp"
#include "reprobench/harness.hpp"
#include "reprobench/index.hpp"
#include "reprobench/io.hpp"
#include "reprobench/metrics.hpp"
#include "reprobench/precision.hpp"
#include "reprobench/rng.hpp"
#include "reprobench/synthetic.hpp"

using namespace reprobench;
namespace fs = std::filesystem;

namespace {

/// Collects failure reasons for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 20) failures.push_back(what);
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool all_identical(const std::vector<ResultList>& a, const std::vector<ResultList>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!identical_results(a[i], b[i])) return false;
  }
  return true;
}

ResultList as_list(const std::vector<std::string>& ids) {
  ResultList r;
  r.query_id = "q";
  double s = 0;
  for (const auto& id : ids) r.entries.push_back({id, s += 1});
  return r;
}

std::vector<std::string> random_ids(CounterRng& rng, std::size_t len, std::size_t universe) {
  std::vector<std::size_t> pool(universe);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < len; ++i) std::swap(pool[i], pool[i + rng.next_below(universe - i)]);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back("doc" + std::to_string(pool[i]));
  return out;
}

// Every metric of every cell must have all its values equal to `want`.
void expect_all_equal(Check& c, const ReproReport& r, const std::vector<std::string>& metrics, double want) {
  for (const auto& cell : r.cells) {
    for (const auto& m : metrics) {
      const auto it = cell.metrics.find(m);
      if (it == cell.metrics.end()) {
        c.expect(false, cell.name + ": missing " + m);
        continue;
      }
      for (const auto& v : it->second.raw) {
        c.expect(v.has_value() && *v == want, cell.name + ": " + m + " != " + fmt(want));
      }
    }
    if (cell.scalars.count("emr")) c.expect(cell.scalars.at("emr") == want, cell.name + ": emr != " + fmt(want));
  }
}

// ---------------------------------------------------------------------------

Check criterion_stability(std::string& detail) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto [docs, qs] = gen_synthetic({42, 10000, 100, 128, 32, 0.5});
  ExperimentConfig base;
  base.k = 50;
  base.n_runs = 5;
  base.seed_policy = SeedPolicy::deterministic(42);
  const auto rep = scenario_stability(index_preset_names(), base, docs, qs);
  const double secs = seconds_since(t0);
  c.expect(rep.cells.size() == 6, "expected 6 preset cells");
  expect_all_equal(c, rep, {"exact_match", "jaccard", "kendall_tau"}, 1.0);
  c.expect(secs < 60.0, "took " + fmt(secs) + " s (limit 60 s)");
  detail = std::to_string(rep.cells.size()) + " presets x 5 runs, " + fmt(secs) + " s";
  return c;
}

Check criterion_distributed(std::string& detail) {
  Check c;
  const auto [docs, qs] = gen_synthetic({42, 10000, 100, 128, 32, 0.5});
  DistributedScenarioSpec spec;
  spec.k = 50;
  spec.n_nodes = 4;
  spec.n_runs = 5;
  const auto rep = scenario_distributed(docs, qs, spec);
  c.expect(rep.cells.size() == 12, "expected 12 index x strategy cells");
  expect_all_equal(c, rep, {"exact_match", "jaccard", "kendall_tau"}, 1.0);

  const auto single = build_index(FlatL2Params{}, docs, 0)->search(qs, 50);
  std::size_t checked = 0;
  for (std::size_t nodes : {1u, 2u, 3u, 4u, 8u}) {
    for (const auto& s : {ShardingStrategy::hash(), ShardingStrategy::range(), ShardingStrategy::random(42)}) {
      const auto got = distributed_search(docs, qs, 50, nodes, s, FlatL2Params{}, 42);
      c.expect(all_identical(got, single),
               "flat on " + std::to_string(nodes) + " nodes / " + std::string(to_string(s.kind)) + " differs from single node");
      ++checked;
    }
  }
  detail = std::to_string(rep.cells.size()) + " cells x 5 runs; flat vs single node on " + std::to_string(checked) +
           " node/strategy pairs";
  return c;
}

Check criterion_insertion(std::string& detail) {
  Check c;
  const auto spec = insertion_size_preset("desk");
  const auto [docs, qs] = gen_synthetic(spec);
  std::ostringstream d;
  for (const std::string name : {"flat_l2", "hnsw_accurate", "hnsw_fast", "ivf", "lsh"}) {
    const auto rep = scenario_insertion(index_preset(name), docs, 0.8, qs, 50, spec.seed);
    const auto& cell = rep.cells.at(0);
    const auto& tau = cell.metrics.at("kendall_tau");
    const auto& ov = cell.metrics.at("overlap_coefficient");
    if (name == "flat_l2") {
      c.expect(tau.exclusions == 0, "flat: tau undefined for some query");
      for (const auto& t : tau.raw) c.expect(t && *t == 1.0, "flat: tau != 1");
      c.expect(tau.summary && tau.summary->std == 0.0, "flat: tau variance != 0");
    }
    std::size_t outside = 0;
    for (std::size_t q = 0; q < ov.raw.size(); ++q) {
      const auto& o = ov.raw[q];
      if (!(o && *o > 0.0 && *o <= 1.0)) ++outside;
    }
    c.expect(outside == 0, name + ": overlap outside (0,1] on " + std::to_string(outside) + " of " +
                               std::to_string(ov.raw.size()) + " queries (min " + fmt(ov.summary->min) + ")");
    c.expect(ov.summary && ov.summary->mean < 1.0, name + ": no displacement (mean overlap = 1)");
    d << name << " tau=" << (tau.summary ? fmt(tau.summary->mean) : "n/a") << " (excl " << tau.exclusions
      << ") overlap=" << fmt(ov.summary->mean) << "; ";
  }
  detail = d.str();
  return c;
}

Check criterion_precision(std::string& detail) {
  Check c;
  PrecisionScenarioSpec spec;
  spec.rows = 1000;
  spec.dims = 128;
  spec.n_runs = 5;
  const auto rep = scenario_precision(spec);
  std::size_t cells = 0;
  for (Precision p : kAllPrecisions) {
    for (const char* mode : {"-det", "-non-det"}) {
      const auto& cell = rep.cell(std::string(to_string(p)) + mode);
      c.expect(cell.scalars.at("mean_l2") == 0.0 && cell.scalars.at("mean_cosine") == 1.0,
               cell.name + ": drift is not (0, 1)");
      cells += cell.labels.at("reproducible") == "yes";
    }
  }
  c.expect(cells == 8, std::to_string(cells) + " of 8 cells reproducible");

  const auto m = unit_gaussian_matrix(42, 1000, 128);
  const auto dm = drift_matrix(m);
  for (std::size_t i = 0; i < 4; ++i) {
    c.expect(dm.l2[i][i] == 0.0, "non-zero diagonal");
    for (std::size_t j = 0; j < 4; ++j) c.expect(dm.l2[i][j] == dm.l2[j][i], "asymmetric matrix");
  }
  const double fp16 = dm.l2[0][1], bf16 = dm.l2[0][2];
  const double ratio = bf16 / fp16;
  c.expect(bf16 > fp16, "L2(FP32,BF16) <= L2(FP32,FP16)");
  c.expect(ratio >= 4.0 && ratio <= 16.0, "BF16/FP16 ratio " + fmt(ratio) + " outside [4,16]");

  // Quantization oracle: FP16 and BF16 cells recomputed by bit manipulation.
  for (const auto& [col, q] : std::vector<std::pair<std::size_t, float (*)(float)>>{{1, oracle::fp16}, {2, oracle::bf16}}) {
    double acc = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double ss = 0;
      for (float v : m.row(r)) {
        const double e = double(v) - double(q(v));
        ss += e * e;
      }
      acc += std::sqrt(ss);
    }
    const double want = acc / double(m.rows());
    c.expect(std::fabs(dm.l2[0][col] - want) <= 1e-9 * want, "drift cell disagrees with quantization oracle");
  }
  detail = std::to_string(cells) + "/8 cells (0,1); BF16/FP16 L2 ratio " + fmt(ratio);
  return c;
}

Check criterion_metric_oracles(std::string& detail) {
  Check c;
  std::vector<std::string> base = {"a", "b", "c", "d", "e"};
  auto perm = base;
  std::size_t n_perm = 0;
  do {
    c.expect(kendall_tau(as_list(base), as_list(perm)).tau == oracle::kendall_pairs(base, perm), "tau on permutation");
    ++n_perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  c.expect(n_perm == 120, "expected 120 permutations");

  CounterRng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(50), 70);
    const auto b = random_ids(rng, 1 + rng.next_below(50), 70);
    const double want = oracle::kendall_pairs(a, b);
    const auto got = kendall_tau(as_list(a), as_list(b)).tau;
    c.expect(std::isnan(want) ? !got.has_value() : (got && *got == want), "tau on random pair");
  }
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(50), 70);
    const auto b = random_ids(rng, 1 + rng.next_below(50), 70);
    const double p = 0.5 + 0.49 * rng.next_double();
    const std::size_t depth = 1 + rng.next_below(60);
    c.expect(std::fabs(rbo(as_list(a), as_list(b), p, depth) - oracle::rbo_direct(a, b, p, depth)) <= 1e-12,
             "rbo on random pair");
  }
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_ids(rng, 1 + rng.next_below(40), 60);
    const auto b = random_ids(rng, 1 + rng.next_below(40), 60);
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    c.expect(jaccard(sa, sb) == oracle::jaccard_sets(sa, sb), "jaccard on random pair");
    std::size_t inter = 0;
    for (const auto& x : sa) inter += sb.count(x);
    const auto ov = overlap_coefficient(as_list(a), as_list(b));
    c.expect(ov.count == inter && ov.coefficient == double(inter) / double(sa.size()), "overlap on random pair");
  }
  detail = "120 permutations, 1000 tau / rbo / set pairs";
  return c;
}

Check criterion_exact_search(std::string& detail) {
  Check c;
  CounterRng rng(606);
  std::size_t ivf_cases = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.next_below(500), d = 1 + rng.next_below(64), k = 1 + rng.next_below(60);
    CounterRng data_rng(rng.next_u64());
    std::vector<std::string> ids;
    std::vector<float> v(n * d), qv(d);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(padded_id('d', i, n));
    for (auto& x : v) x = static_cast<float>(data_rng.next_double() * 2 - 1);
    for (auto& x : qv) x = static_cast<float>(data_rng.next_double() * 2 - 1);
    const DocumentCorpus docs(ids, EmbeddingMatrix(n, d, v));
    const QuerySet q({"q0"}, EmbeddingMatrix(1, d, qv));

    const auto flat = build_index(FlatL2Params{}, docs, 0)->search(q, k);
    const auto want = oracle::brute_force(ids, v, d, qv, k, false);
    bool same = flat[0].entries.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      same = flat[0].entries[i].doc_id == want[i].id &&
             std::bit_cast<std::uint64_t>(flat[0].entries[i].score) == std::bit_cast<std::uint64_t>(want[i].score);
    }
    c.expect(same, "flat != brute force (case " + std::to_string(t) + ")");

    const std::size_t nlist = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(double(n)))));
    const auto ivf = build_index(IvfParams{nlist, nlist, 20}, docs, t)->search(q, k);
    c.expect(all_identical(ivf, flat), "ivf(nprobe = nlist) != flat (case " + std::to_string(t) + ")");
    ++ivf_cases;
  }
  detail = "100 flat / brute-force cases, " + std::to_string(ivf_cases) + " ivf cases";
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Check criterion_determinism(const std::string& cli, std::string& detail) {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "reprobench_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> scenarios = {
      {"stability", "scenario stability --docs 2000 --queries 20 --k 20 --runs 3"},
      {"insertion", "scenario insertion --docs 2000 --queries 20 --k 20 --index hnsw"},
      {"cross", "scenario cross --docs 2000 --queries 20 --k 20 --dims-b 64"},
      {"precision", "scenario precision --docs 200 --runs 3"},
      {"distributed", "scenario distributed --docs 2000 --queries 20 --k 20 --runs 2 --nodes 3"},
      {"distributed_socket", "scenario distributed --docs 1000 --queries 10 --k 10 --runs 2 --index hnsw,lsh --transport socket"},
  };
  for (const auto& [name, args] : scenarios) {
    std::string redacted[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (name + "_" + std::to_string(run) + ".json");
      const std::string cmd = "\"" + cli + "\" " + args + " --seed 42 --out \"" + out.string() + "\" > /dev/null";
      const int rc = std::system(cmd.c_str());
      c.expect(rc == 0, name + ": CLI exited with " + std::to_string(rc));
      if (rc != 0) break;
      redacted[run] = redact_metadata(nlohmann::json::parse(slurp(out))).dump(2);
    }
    c.expect(!redacted[0].empty() && redacted[0] == redacted[1], name + ": reports differ after redaction");
  }
  fs::remove_all(dir);

  // Adversarial arrival order at the gather step.
  const auto [docs, qs] = gen_synthetic({7, 3000, 100, 64, 16, 0.5});
  std::size_t shuffles = 0;
  for (const auto& preset : {"flat_l2", "hnsw", "lsh", "ivf"}) {
    const auto ref = distributed_search(docs, qs, 20, 4, ShardingStrategy::hash(), index_preset(preset), 42);
    for (std::uint64_t s = 0; s < 3; ++s) {
      DistributedOptions opts;
      CounterRng rng(s, 77);
      opts.gather_shuffle = [&](std::vector<CandidateBatch>& b) {
        for (std::size_t i = b.size(); i > 1; --i) std::swap(b[i - 1], b[rng.next_below(i)]);
        ++shuffles;
      };
      const auto got = distributed_search(docs, qs, 20, 4, ShardingStrategy::hash(), index_preset(preset), 42, opts);
      c.expect(all_identical(ref, got), std::string(preset) + ": shuffled gather changed the output");
    }
  }
  c.expect(shuffles >= 1000, "only " + std::to_string(shuffles) + " shuffles");
  detail = std::to_string(scenarios.size()) + " CLI scenarios x 2 runs, " + std::to_string(shuffles) + " gather shuffles";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_tests <reprobench-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];

  struct Criterion {
    const char* name;
    std::function<Check(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 stability: 6 presets x 5 fixed-seed runs agree exactly", criterion_stability},
      {"2 distributed: 4 indexes x 3 strategies x 4 nodes agree; flat equals single node", criterion_distributed},
      {"3 insertion: flat tau = 1 with zero variance; displacement without re-ranking", criterion_insertion},
      {"4 precision: 8/8 cells reproducible; drift matrix structure and ranking", criterion_precision},
      {"5 metric oracles: tau, rbo, jaccard, overlap", criterion_metric_oracles},
      {"6 exact search: flat = brute force bit for bit; ivf(nprobe = nlist) = flat", criterion_exact_search},
      {"7 determinism: CLI reports byte-identical; gather order irrelevant",
       [&](std::string& d) { return criterion_determinism(cli, d); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    std::string detail;
    Check result;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      result = cr.run(detail);
    } catch (const std::exception& e) {
      result.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = result.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << cr.name << "]  " << detail << " (" << fmt(seconds_since(t0))
              << " s)\n";
    for (const auto& f : result.failures) std::cout << "      - " << f << '\n';
    std::cout.flush();
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
