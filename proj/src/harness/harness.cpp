#include "reprobench/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <thread>
#include <unordered_map>

#include "reprobench/errors.hpp"
#include "reprobench/index.hpp"

namespace reprobench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs fn(0..n-1), optionally on one thread each. Rethrows the first
// failure in index order.
void for_each_cell(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    workers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      workers.emplace_back([&, i] {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> ids_of(const QuerySet& q) { return q.ids(); }

VectorSet quantized(const VectorSet& v, Precision p) {
  if (p == Precision::FP32 || v.embeddings().precision() == p) return v;
  return VectorSet(v.ids(), quantize(v.embeddings(), p));
}

// Per-query agreement across every pair of runs.
void add_run_metrics(ReportCell& cell, const std::vector<RunRecord>& runs) {
  const std::size_t nq = runs.front().results.size();
  std::vector<std::optional<double>> exact(nq), jac(nq), tau(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    bool same = true;
    double jsum = 0.0;
    double tsum = 0.0;
    std::size_t pairs = 0;
    std::size_t tau_pairs = 0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        const auto& la = runs[a].results[q];
        const auto& lb = runs[b].results[q];
        same = same && identical_results(la, lb);
        jsum += jaccard(la, lb);
        ++pairs;
        if (const auto t = kendall_tau(la, lb); t.tau) {
          tsum += *t.tau;
          ++tau_pairs;
        }
      }
    }
    exact[q] = same ? 1.0 : 0.0;
    jac[q] = jsum / static_cast<double>(pairs);
    if (tau_pairs > 0) tau[q] = tsum / static_cast<double>(tau_pairs);
  }
  cell.metrics["exact_match"] = make_series(std::move(exact));
  cell.metrics["jaccard"] = make_series(std::move(jac));
  cell.metrics["kendall_tau"] = make_series(std::move(tau));
  cell.scalars["emr"] = exact_match_rate(runs);
}

nlohmann::json run_metadata(const std::vector<RunRecord>& runs) {
  auto out = nlohmann::json::array();
  for (const auto& r : runs) {
    out.push_back({{"effective_seed", r.effective_seed},
                   {"build_ms", r.timings.build_ms},
                   {"search_ms", r.timings.search_ms}});
  }
  return out;
}

void stamp(ReproReport& report) { report.metadata["generated_at"] = utc_timestamp(); }

struct RepeatedResult {
  ReportCell cell;
  std::string fingerprint;
  nlohmann::json runs;
};

RepeatedResult repeated_cell(const ExperimentConfig& config, const DocumentCorpus& corpus,
                             const QuerySet& queries, std::size_t threads) {
  validate(config);
  if (config.n_runs < 2) throw ValidationError("run_repeated: n_runs must be >= 2");
  const DocumentCorpus docs = quantized(corpus, config.precision);
  const QuerySet qs = quantized(queries, config.precision);

  RepeatedResult out;
  out.fingerprint = config_fingerprint(config);
  std::vector<RunRecord> runs;
  std::vector<CentroidSet> centroids;
  for (std::size_t r = 0; r < config.n_runs; ++r) {
    RunRecord rec;
    rec.config_fingerprint = out.fingerprint;
    rec.effective_seed = effective_seed(config.seed_policy, r);
    const auto t0 = Clock::now();
    const auto index = build_index(config.index_params, docs, rec.effective_seed);
    rec.timings.build_ms = ms_since(t0);
    const auto t1 = Clock::now();
    rec.results = index->search(qs, config.k, threads);
    rec.timings.search_ms = ms_since(t1);
    if (auto c = index->centroids()) centroids.push_back(std::move(*c));
    runs.push_back(std::move(rec));
  }

  out.cell.name = index_label(config.index_params);
  add_run_metrics(out.cell, runs);
  out.cell.metrics["score_stability"] = make_series([&] {
    const auto s = score_stability(runs);
    return std::vector<std::optional<double>>(s.begin(), s.end());
  }());
  if (!centroids.empty()) out.cell.scalars["centroid_stability"] = centroid_stability(centroids);
  out.runs = run_metadata(runs);
  return out;
}

}  // namespace

MetricSeries make_series(std::vector<std::optional<double>> raw) {
  MetricSeries s;
  std::vector<double> defined;
  defined.reserve(raw.size());
  for (const auto& v : raw) {
    if (v) {
      defined.push_back(*v);
    } else {
      ++s.exclusions;
    }
  }
  if (!defined.empty()) s.summary = summarize(defined);
  s.raw = std::move(raw);
  return s;
}

const ReportCell& ReproReport::cell(std::string_view name) const {
  for (const auto& c : cells) {
    if (c.name == name) return c;
  }
  throw ValidationError("report has no cell '" + std::string(name) + "'");
}

std::string vector_set_fingerprint(const VectorSet& v) {
  ByteWriter w;
  w.u64(v.size());
  w.u32(static_cast<std::uint32_t>(v.dims()));
  w.u8(static_cast<std::uint8_t>(v.embeddings().precision()));
  for (const auto& id : v.ids()) w.str(id);
  w.f32s(v.embeddings().data());
  const auto& b = w.bytes();
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
}

std::string index_label(const IndexParams& params) {
  for (const auto& name : index_preset_names()) {
    if (index_preset(name) == params) return name;
  }
  return index_kind_name(params);
}

ReproReport run_repeated(const ExperimentConfig& config, const DocumentCorpus& corpus,
                         const QuerySet& queries, const HarnessOptions& options) {
  auto res = repeated_cell(config, corpus, queries, options.threads);
  ReproReport report;
  report.scenario = "repeated";
  report.config = to_json(config);
  report.fingerprints = {res.fingerprint, vector_set_fingerprint(corpus),
                         vector_set_fingerprint(queries)};
  report.query_ids = ids_of(queries);
  report.metadata["runs"][res.cell.name] = std::move(res.runs);
  report.cells.push_back(std::move(res.cell));
  report.annotations["reference_full_scale"] = {{"emr", 1.0}, {"jaccard", 1.0}, {"kendall_tau", 1.0}};
  report.annotations["preset_note"] =
      "hnsw_accurate and hnsw_fast parameters are this tool's own choice; see each cell's params label";
  stamp(report);
  return report;
}

ReproReport scenario_stability(const std::vector<std::string>& presets, const ExperimentConfig& base,
                               const DocumentCorpus& corpus, const QuerySet& queries,
                               const HarnessOptions& options) {
  if (presets.empty()) throw ValidationError("scenario_stability: no index presets");
  std::vector<ExperimentConfig> configs;
  for (const auto& name : presets) {
    ExperimentConfig c = base;
    c.index_params = index_preset(name);
    validate(c);
    configs.push_back(std::move(c));
  }
  std::vector<std::optional<RepeatedResult>> results(configs.size());
  for_each_cell(configs.size(), options.parallel_cells, [&](std::size_t i) {
    results[i] = repeated_cell(configs[i], corpus, queries, options.threads);
    results[i]->cell.name = presets[i];
    results[i]->cell.labels["params"] = to_json(configs[i].index_params).dump();
  });

  ReproReport report;
  report.scenario = "stability";
  report.config = to_json(base);
  report.config.erase("index");
  report.config["indexes"] = presets;
  report.query_ids = ids_of(queries);
  for (auto& r : results) {
    report.fingerprints.push_back(r->fingerprint);
    report.metadata["runs"][r->cell.name] = std::move(r->runs);
    report.cells.push_back(std::move(r->cell));
  }
  report.fingerprints.push_back(vector_set_fingerprint(corpus));
  report.fingerprints.push_back(vector_set_fingerprint(queries));
  report.annotations["reference_full_scale"] = {{"emr", 1.0}, {"jaccard", 1.0}, {"kendall_tau", 1.0}};
  stamp(report);
  return report;
}

ReproReport scenario_insertion(const IndexParams& index_params, const DocumentCorpus& corpus,
                               double split_ratio, const QuerySet& queries, std::size_t k,
                               std::uint64_t seed) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw ValidationError("scenario_insertion: split_ratio must be in (0, 1)");
  }
  if (k < 1) throw ValidationError("scenario_insertion: k must be >= 1");
  validate(index_params);
  const std::size_t n = corpus.size();
  const auto n1 = static_cast<std::size_t>(std::ceil(split_ratio * static_cast<double>(n)));
  if (n1 == 0) throw ValidationError("scenario_insertion: split leaves the initial set empty");
  if (n1 >= n) throw ValidationError("scenario_insertion: split leaves no documents to insert");
  const DocumentCorpus v1 = corpus.slice(0, n1);
  const DocumentCorpus delta = corpus.slice(n1, n - n1);

  const auto t0 = Clock::now();
  auto index = build_index(index_params, v1, seed);
  const double build_ms = ms_since(t0);
  const auto before = index->search(queries, k);
  const auto t1 = Clock::now();
  index->add(delta);
  const double add_ms = ms_since(t1);
  const auto after = index->search(queries, k);

  const std::size_t nq = queries.size();
  std::vector<std::optional<double>> count(nq), coeff(nq), rbo_v(nq), tau(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    if (!before[q].entries.empty()) {
      const auto o = overlap_coefficient(before[q], after[q]);
      count[q] = static_cast<double>(o.count);
      coeff[q] = o.coefficient;
    }
    rbo_v[q] = rbo(before[q], after[q], kDefaultRboPersistence, k);
    tau[q] = kendall_tau(before[q], after[q]).tau;
  }

  ReproReport report;
  report.scenario = "insertion";
  report.config = {{"index", to_json(index_params)},
                   {"split_ratio", split_ratio},
                   {"initial_docs", n1},
                   {"inserted_docs", n - n1},
                   {"k", k},
                   {"seed", seed},
                   {"rbo_p", kDefaultRboPersistence}};
  report.fingerprints = {vector_set_fingerprint(corpus), vector_set_fingerprint(queries)};
  report.query_ids = ids_of(queries);
  ReportCell cell;
  cell.name = index_label(index_params);
  cell.metrics["overlap_count"] = make_series(std::move(count));
  cell.metrics["overlap_coefficient"] = make_series(std::move(coeff));
  cell.metrics["rbo"] = make_series(std::move(rbo_v));
  cell.metrics["kendall_tau"] = make_series(std::move(tau));
  report.cells.push_back(std::move(cell));
  report.annotations["reference_full_scale"] = {
      {"hnsw", {{"overlap_coefficient", 0.793}, {"rbo", 0.725}, {"kendall_tau", 1.000}}},
      {"ivf", {{"overlap_coefficient", 0.806}, {"rbo", 0.730}, {"kendall_tau", 1.000}}},
      {"lsh", {{"overlap_coefficient", 0.804}, {"rbo", 0.735}, {"kendall_tau", 1.000}}}};
  report.metadata["timings"] = {{"build_ms", build_ms}, {"add_ms", add_ms}};
  stamp(report);
  return report;
}

ReproReport scenario_cross_embedding(const std::pair<DocumentCorpus, QuerySet>& emb_a,
                                     const std::pair<DocumentCorpus, QuerySet>& emb_b,
                                     std::size_t k) {
  if (k < 1) throw ValidationError("scenario_cross_embedding: k must be >= 1");
  const auto& [docs_a, q_a] = emb_a;
  const auto& [docs_b, q_b] = emb_b;
  const auto same_ids = [](const std::vector<std::string>& x, const std::vector<std::string>& y) {
    return IdSet(x.begin(), x.end()) == IdSet(y.begin(), y.end());
  };
  if (docs_a.empty() || !same_ids(docs_a.ids(), docs_b.ids())) {
    throw ValidationError("scenario_cross_embedding: document id sets differ");
  }
  if (!same_ids(q_a.ids(), q_b.ids())) {
    throw ValidationError("scenario_cross_embedding: query id sets differ");
  }
  if (q_a.dims() != docs_a.dims() || q_b.dims() != docs_b.dims()) {
    throw ValidationError("scenario_cross_embedding: query dims do not match corpus dims");
  }

  const auto t0 = Clock::now();
  const auto res_a = build_index(FlatL2Params{}, docs_a, 0)->search(q_a, k);
  const auto res_b = build_index(FlatL2Params{}, docs_b, 0)->search(q_b, k);
  const double search_ms = ms_since(t0);
  std::unordered_map<std::string_view, const ResultList*> by_id;
  for (const auto& r : res_b) by_id.emplace(r.query_id, &r);

  const std::size_t nq = q_a.size();
  std::vector<std::optional<double>> count(nq), coeff(nq), jac(nq), rbo_v(nq), tau(nq), pval(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto s = agreement(res_a[q], *by_id.at(res_a[q].query_id));
    count[q] = static_cast<double>(s.overlap_count);
    coeff[q] = s.overlap_coefficient;
    jac[q] = s.jaccard;
    rbo_v[q] = s.rbo;
    tau[q] = s.kendall_tau;
    pval[q] = s.tau_p_value;
  }

  ReproReport report;
  report.scenario = "cross_embedding";
  report.config = {{"k", k},
                   {"index", to_json(FlatL2Params{})},
                   {"dims_a", docs_a.dims()},
                   {"dims_b", docs_b.dims()},
                   {"rbo_p", kDefaultRboPersistence}};
  report.fingerprints = {vector_set_fingerprint(docs_a), vector_set_fingerprint(q_a),
                         vector_set_fingerprint(docs_b), vector_set_fingerprint(q_b)};
  report.query_ids = ids_of(q_a);
  ReportCell cell;
  cell.name = "a_vs_b";
  cell.metrics["overlap_count"] = make_series(std::move(count));
  cell.metrics["overlap_coefficient"] = make_series(std::move(coeff));
  cell.metrics["jaccard"] = make_series(std::move(jac));
  cell.metrics["rbo"] = make_series(std::move(rbo_v));
  cell.metrics["kendall_tau"] = make_series(std::move(tau));
  cell.metrics["tau_p_value"] = make_series(std::move(pval));
  report.cells.push_back(std::move(cell));
  report.annotations["reference_full_scale"] = {
      {"bge_vs_e5", {{"overlap_coefficient", 0.540}, {"rbo", 0.570}, {"kendall_tau", 0.384}}},
      {"bge_vs_qwen", {{"overlap_coefficient", 0.454}, {"rbo", 0.486}, {"kendall_tau", 0.338}}},
      {"e5_vs_qwen", {{"overlap_coefficient", 0.432}, {"rbo", 0.474}, {"kendall_tau", 0.322}}}};
  report.metadata["timings"] = {{"search_ms", search_ms}};
  stamp(report);
  return report;
}

ReproReport scenario_precision(const PrecisionScenarioSpec& spec) {
  if (spec.formats.empty() || spec.modes.empty()) {
    throw ValidationError("scenario_precision: formats and modes must be non-empty");
  }
  if (spec.n_runs < 2) throw ValidationError("scenario_precision: n_runs must be >= 2");
  if (spec.rows < 1 || spec.dims < 1) throw ValidationError("scenario_precision: rows and dims must be >= 1");
  const auto rows = spec.rows;
  const auto dims = spec.dims;
  const auto corpus_seed = spec.corpus_seed;
  // The synthetic embedding path depends only on the corpus seed.
  const EmbeddingSource source = [=](std::uint64_t) {
    return unit_gaussian_matrix(corpus_seed, rows, dims);
  };
  const EmbeddingMatrix base = source(corpus_seed);

  ReproReport report;
  report.scenario = "precision";
  auto formats = nlohmann::json::array();
  for (auto f : spec.formats) formats.push_back(std::string(to_string(f)));
  auto modes = nlohmann::json::array();
  for (auto m : spec.modes) modes.push_back(m == SeedPolicy::Mode::Deterministic ? "det" : "non-det");
  report.config = {{"corpus_seed", corpus_seed}, {"rows", rows}, {"dims", dims},
                   {"formats", formats},         {"modes", modes}, {"n_runs", spec.n_runs}};
  {
    ByteWriter w;
    w.f32s(base.data());
    const auto& b = w.bytes();
    report.fingerprints = {sha256_hex(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()))};
  }

  auto latency = nlohmann::json::object();
  for (const auto fmt : spec.formats) {
    for (const auto mode : spec.modes) {
      const bool det = mode == SeedPolicy::Mode::Deterministic;
      const SeedPolicy policy = det ? SeedPolicy::deterministic(corpus_seed) : SeedPolicy::non_deterministic();
      const auto stats = same_config_repro(source, fmt, policy, spec.n_runs);
      ReportCell cell;
      cell.name = std::string(to_string(fmt)) + (det ? "-det" : "-non-det");
      cell.scalars["mean_l2"] = stats.mean_l2;
      cell.scalars["mean_cosine"] = stats.mean_cosine;
      cell.labels["reproducible"] = stats.reproducible ? "yes" : "no";
      double sum = 0.0;
      for (double v : stats.latency_ms) sum += v;
      latency[cell.name] = {{"mean_ms", sum / static_cast<double>(stats.latency_ms.size())},
                            {"runs_ms", stats.latency_ms},
                            {"effective_seeds", stats.effective_seeds}};
      report.cells.push_back(std::move(cell));
    }
    if (spec.modes.size() > 1) {
      // det vs non-det within the format: one run of each.
      const auto a = quantize(source(effective_seed(SeedPolicy::deterministic(corpus_seed), 0)), fmt);
      const auto b = quantize(source(effective_seed(SeedPolicy::non_deterministic(), 0)), fmt);
      ReportCell cell;
      cell.name = std::string(to_string(fmt)) + "-det-vs-non-det";
      cell.scalars["mean_l2"] = embedding_drift(a, b).mean_l2;
      cell.labels["result"] = a == b ? "identical" : "different";
      report.cells.push_back(std::move(cell));
    }
  }
  report.drift = drift_matrix(base);
  report.annotations["reference_full_scale"] = {
      {"l2_fp32_fp16", 5.74e-04}, {"l2_fp32_tf32", 4.09e-04}, {"l2_fp32_bf16", 6.31e-03}};
  report.metadata["latency"] = std::move(latency);
  stamp(report);
  return report;
}

ReproReport scenario_distributed(const DocumentCorpus& corpus, const QuerySet& queries,
                                 const DistributedScenarioSpec& spec, const HarnessOptions& options) {
  if (spec.n_nodes < 2) throw ValidationError("scenario_distributed: n_nodes must be >= 2");
  if (spec.n_runs < 2) throw ValidationError("scenario_distributed: n_runs must be >= 2");
  if (spec.k < 1) throw ValidationError("scenario_distributed: k must be >= 1");
  if (spec.indexes.empty() || spec.strategies.empty()) {
    throw ValidationError("scenario_distributed: empty index or strategy list");
  }
  struct Cell {
    std::string index;
    IndexParams params;
    ShardingStrategy strategy;
  };
  std::vector<Cell> cells;
  for (const auto kind : spec.strategies) {
    for (const auto& name : spec.indexes) {
      cells.push_back({name, index_preset(name), ShardingStrategy{kind, kind == ShardingStrategy::Kind::Random ? spec.seed : 0}});
    }
  }

  std::vector<ReportCell> out(cells.size());
  std::vector<nlohmann::json> meta(cells.size());
  for_each_cell(cells.size(), options.parallel_cells, [&](std::size_t i) {
    const auto& c = cells[i];
    ExperimentConfig cfg;
    cfg.index_params = c.params;
    cfg.k = spec.k;
    cfg.seed_policy = SeedPolicy::deterministic(spec.seed);
    cfg.n_runs = spec.n_runs;
    cfg.shard_plan = ShardPlan{spec.n_nodes, c.strategy};
    const std::string fp = config_fingerprint(cfg);
    std::vector<RunRecord> runs;
    for (std::size_t r = 0; r < spec.n_runs; ++r) {
      RunRecord rec;
      rec.config_fingerprint = fp;
      rec.effective_seed = spec.seed;
      const auto t0 = Clock::now();
      rec.results = distributed_search(corpus, queries, spec.k, spec.n_nodes, c.strategy, c.params,
                                       spec.seed, DistributedOptions{spec.transport, {}});
      rec.timings.search_ms = ms_since(t0);
      runs.push_back(std::move(rec));
    }
    ReportCell& cell = out[i];
    cell.name = c.index + "/" + std::string(to_string(c.strategy.kind));
    cell.labels["fingerprint"] = fp;
    add_run_metrics(cell, runs);
    if (std::holds_alternative<FlatL2Params>(c.params) || std::holds_alternative<FlatIPParams>(c.params)) {
      const auto single = build_index(c.params, corpus, spec.seed)->search(queries, spec.k);
      bool exact = single.size() == runs.front().results.size();
      for (std::size_t q = 0; exact && q < single.size(); ++q) {
        exact = identical_results(single[q], runs.front().results[q]);
      }
      cell.labels["exact_single_node"] = exact ? "pass" : "fail";
    }
    meta[i] = run_metadata(runs);
  });

  ReproReport report;
  report.scenario = "distributed";
  auto strategies = nlohmann::json::array();
  for (auto s : spec.strategies) strategies.push_back(std::string(to_string(s)));
  report.config = {{"k", spec.k},
                   {"n_nodes", spec.n_nodes},
                   {"seed", spec.seed},
                   {"n_runs", spec.n_runs},
                   {"indexes", spec.indexes},
                   {"strategies", strategies},
                   {"transport", std::string(to_string(spec.transport))}};
  report.query_ids = ids_of(queries);
  for (std::size_t i = 0; i < out.size(); ++i) {
    report.fingerprints.push_back(out[i].labels["fingerprint"]);
    report.metadata["runs"][out[i].name] = std::move(meta[i]);
    report.cells.push_back(std::move(out[i]));
  }
  report.fingerprints.push_back(vector_set_fingerprint(corpus));
  report.fingerprints.push_back(vector_set_fingerprint(queries));
  report.annotations["reference_full_scale"] = {{"emr", 1.0}, {"jaccard", 1.0}, {"kendall_tau", 1.0}};
  stamp(report);
  return report;
}

SyntheticSpec insertion_size_preset(std::string_view name) {
  SyntheticSpec s;
  if (name == "desk") return s;
  if (name == "s1") {
    s.n_docs = 9900;
    return s;
  }
  throw ValidationError("unknown size preset '" + std::string(name) + "'");
}

}  // namespace reprobench
