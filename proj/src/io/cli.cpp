#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "reprobench/errors.hpp"
#include "reprobench/io.hpp"
#include "reprobench/synthetic.hpp"

namespace reprobench {

namespace {

struct Options {
  std::size_t docs = 10000;
  std::size_t queries = 100;
  std::size_t dims = 128;
  std::size_t clusters = 32;
  double noise = 0.5;
  std::size_t k = 50;
  std::size_t runs = 5;
  std::uint64_t seed = 42;
  std::size_t nodes = 4;
  std::vector<std::string> sharding;
  std::vector<std::string> indexes;
  double split = 0.8;
  std::string size = "desk";
  std::string out;
  std::string queries_out;
  std::string in;
  std::string corpus_file;
  std::string query_file;
  std::string b_corpus_file;
  std::string b_query_file;
  std::size_t dims_b = 0;
  std::string precision = "FP32";
  std::string transport = "inproc";
  std::size_t threads = 1;
  bool parallel = false;
  bool nondeterministic = false;
  bool json = false;
};

void add_data_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--docs", o.docs, "Synthetic corpus size")->check(CLI::PositiveNumber);
  cmd->add_option("--queries", o.queries, "Synthetic query count")->check(CLI::PositiveNumber);
  cmd->add_option("--dims", o.dims, "Embedding dimensionality")->check(CLI::PositiveNumber);
  cmd->add_option("--clusters", o.clusters, "Synthetic mixture components")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed (default 42)")->envname("REPRORAG_SEED");
}

void add_input_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--corpus", o.corpus_file, "RRE1 corpus file instead of synthetic data");
  cmd->add_option("--query-file", o.query_file, "RRE1 query file (with --corpus)");
}

void add_output_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Write the report JSON here");
  cmd->add_flag("--json", o.json, "Print a single-line JSON summary");
}

std::pair<DocumentCorpus, QuerySet> load_data(const Options& o, std::uint64_t seed) {
  if (!o.corpus_file.empty() || !o.query_file.empty()) {
    if (o.corpus_file.empty() || o.query_file.empty()) {
      throw ValidationError("--corpus and --query-file must be given together");
    }
    DocumentCorpus docs = read_embeddings(o.corpus_file, 'd');
    QuerySet qs = read_embeddings(o.query_file, 'q');
    if (qs.dims() != docs.dims()) throw ValidationError("query dims do not match corpus dims");
    return {std::move(docs), std::move(qs)};
  }
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_docs = o.docs;
  spec.n_queries = o.queries;
  spec.dims = o.dims;
  spec.clusters = o.clusters;
  spec.noise = o.noise;
  return gen_synthetic(spec);
}

std::vector<std::string> expand_indexes(const std::vector<std::string>& given,
                                        const std::vector<std::string>& fallback) {
  if (given.empty()) return fallback;
  if (given.size() == 1 && given.front() == "all") return index_preset_names();
  for (const auto& n : given) index_preset(n);  // validates
  return given;
}

void print_summary(const ReproReport& report, const Options& o, std::ostream& out) {
  if (o.json) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
      nlohmann::json means = nlohmann::json::object();
      for (const auto& [name, s] : c.metrics) {
        means[name] = s.summary ? nlohmann::json(s.summary->mean) : nlohmann::json(nullptr);
      }
      cells.push_back({{"name", c.name}, {"mean", means}, {"scalars", c.scalars}, {"labels", c.labels}});
    }
    nlohmann::json line = {{"scenario", report.scenario},
                           {"report", o.out.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.out)},
                           {"n_queries", report.query_ids.size()},
                           {"cells", cells}};
    out << line.dump() << '\n';
    return;
  }
  out << "scenario " << report.scenario << '\n';
  for (const auto& c : report.cells) {
    out << "  " << c.name;
    for (const auto& [name, s] : c.metrics) {
      out << "  " << name << '=';
      if (s.summary) {
        out << nlohmann::json(s.summary->mean).dump();
      } else {
        out << "n/a";
      }
    }
    for (const auto& [name, v] : c.scalars) out << "  " << name << '=' << nlohmann::json(v).dump();
    for (const auto& [name, v] : c.labels) {
      if (name != "fingerprint") out << "  " << name << '=' << v;
    }
    out << '\n';
  }
  if (report.drift) {
    out << "  drift l2:";
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) {
        out << ' ' << to_string(report.drift->formats[i]) << '-' << to_string(report.drift->formats[j]) << '='
            << nlohmann::json(report.drift->l2[i][j]).dump();
      }
    }
    out << '\n';
  }
  if (!o.out.empty()) out << "report written to " << o.out << '\n';
}

void finish(const ReproReport& report, const Options& o, std::ostream& out) {
  if (!o.out.empty()) write_report(report, o.out);
  print_summary(report, o, out);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reproducibility benchmarks for vector retrieval", "reprobench"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Write a synthetic corpus and query set as RRE1 files");
  add_data_flags(gen, o);
  gen->add_option("--noise", o.noise, "Noise scale around cluster centers")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", o.out, "Corpus file; queries go to <stem>.queries<ext>")->required();
  gen->add_option("--queries-out", o.queries_out, "Query file path");
  gen->add_flag("--json", o.json, "Print a single-line JSON summary");

  auto* scenario = app.add_subcommand("scenario", "Run a reproducibility scenario");
  scenario->require_subcommand(1);

  auto* stability = scenario->add_subcommand("stability", "Repeated build and search per index preset");
  add_data_flags(stability, o);
  add_input_flags(stability, o);
  add_output_flags(stability, o);
  stability->add_option("--index", o.indexes, "Index presets, comma separated, or 'all'")->delimiter(',');
  stability->add_option("--k", o.k, "Top-k depth")->check(CLI::PositiveNumber);
  stability->add_option("--runs", o.runs, "Runs per preset");
  stability->add_option("--precision", o.precision, "FP32|FP16|BF16|TF32");
  stability->add_flag("--nondeterministic", o.nondeterministic, "Draw each run's seed from the clock");
  stability->add_option("--threads", o.threads, "Search threads")->check(CLI::PositiveNumber);
  stability->add_flag("--parallel", o.parallel, "Run presets concurrently");

  auto* insertion = scenario->add_subcommand("insertion", "Query before and after an incremental add");
  add_data_flags(insertion, o);
  add_input_flags(insertion, o);
  add_output_flags(insertion, o);
  insertion->add_option("--index", o.indexes, "Index preset (default hnsw)");
  insertion->add_option("--k", o.k, "Top-k depth")->check(CLI::PositiveNumber);
  insertion->add_option("--split", o.split, "Fraction of the corpus indexed first");
  insertion->add_option("--size", o.size, "Corpus size preset: desk|s1");

  auto* cross = scenario->add_subcommand("cross", "Agreement between two embedding spaces");
  add_data_flags(cross, o);
  add_output_flags(cross, o);
  cross->add_option("--k", o.k, "Top-k depth")->check(CLI::PositiveNumber);
  cross->add_option("--dims-b", o.dims_b, "Dimensionality of the second synthetic space");
  cross->add_option("--a-corpus", o.corpus_file, "RRE1 corpus, space A");
  cross->add_option("--a-queries", o.query_file, "RRE1 queries, space A");
  cross->add_option("--b-corpus", o.b_corpus_file, "RRE1 corpus, space B");
  cross->add_option("--b-queries", o.b_query_file, "RRE1 queries, space B");

  auto* precision = scenario->add_subcommand("precision", "Format x mode reproducibility and drift");
  precision->add_option("--docs", o.docs, "Rows of the embedding matrix (default 1000)");
  precision->add_option("--dims", o.dims, "Embedding dimensionality")->check(CLI::PositiveNumber);
  precision->add_option("--runs", o.runs, "Runs per cell");
  precision->add_option("--seed", o.seed, "Seed (default 42)")->envname("REPRORAG_SEED");
  add_output_flags(precision, o);

  auto* distributed = scenario->add_subcommand("distributed", "Sharded scatter-gather reproducibility");
  add_data_flags(distributed, o);
  add_input_flags(distributed, o);
  add_output_flags(distributed, o);
  distributed->add_option("--index", o.indexes, "Index presets, comma separated")->delimiter(',');
  distributed->add_option("--sharding", o.sharding, "hash,range,random (default all)")->delimiter(',');
  distributed->add_option("--nodes", o.nodes, "Node count");
  distributed->add_option("--k", o.k, "Top-k depth")->check(CLI::PositiveNumber);
  distributed->add_option("--runs", o.runs, "Runs per cell");
  distributed->add_option("--transport", o.transport, "inproc|socket");
  distributed->add_flag("--parallel", o.parallel, "Run cells concurrently");

  auto* report = app.add_subcommand("report", "Report utilities");
  report->require_subcommand(1);
  auto* csv = report->add_subcommand("csv", "Emit plot CSVs from a report");
  csv->add_option("--in", o.in, "Report JSON")->required();
  csv->add_option("--out", o.out, "Output directory")->required();

  std::vector<const char*> argv{"reprobench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      SyntheticSpec spec{o.seed, o.docs, o.queries, o.dims, o.clusters, o.noise};
      const auto [docs, qs] = gen_synthetic(spec);
      std::filesystem::path corpus_path = o.out;
      std::filesystem::path query_path = o.queries_out;
      if (query_path.empty()) {
        query_path = corpus_path;
        query_path.replace_extension(".queries" + corpus_path.extension().string());
      }
      write_embeddings(corpus_path, docs);
      write_embeddings(query_path, qs);
      if (o.json) {
        out << nlohmann::json{{"corpus", corpus_path.string()}, {"queries", query_path.string()},
                              {"docs", docs.size()}, {"n_queries", qs.size()}, {"dims", docs.dims()},
                              {"fingerprint", vector_set_fingerprint(docs)}}
                   .dump()
            << '\n';
      } else {
        out << "wrote " << docs.size() << " docs to " << corpus_path.string() << " and " << qs.size()
            << " queries to " << query_path.string() << '\n';
      }
    } else if (stability->parsed()) {
      const auto [docs, qs] = load_data(o, o.seed);
      ExperimentConfig base;
      base.k = o.k;
      base.n_runs = o.runs;
      base.precision = parse_precision(o.precision);
      base.seed_policy = o.nondeterministic ? SeedPolicy::non_deterministic() : SeedPolicy::deterministic(o.seed);
      const auto presets = expand_indexes(o.indexes, index_preset_names());
      finish(scenario_stability(presets, base, docs, qs, {o.threads, o.parallel}), o, out);
    } else if (insertion->parsed()) {
      if (insertion->count("--docs") == 0) o.docs = insertion_size_preset(o.size).n_docs;
      const auto [docs, qs] = load_data(o, o.seed);
      const auto presets = expand_indexes(o.indexes, {"hnsw"});
      if (presets.size() != 1) throw ValidationError("insertion takes exactly one --index");
      finish(scenario_insertion(index_preset(presets.front()), docs, o.split, qs, o.k, o.seed), o, out);
    } else if (cross->parsed()) {
      std::pair<DocumentCorpus, QuerySet> a;
      std::pair<DocumentCorpus, QuerySet> b;
      if (!o.corpus_file.empty() || !o.b_corpus_file.empty()) {
        if (o.corpus_file.empty() || o.query_file.empty() || o.b_corpus_file.empty() || o.b_query_file.empty()) {
          throw ValidationError("--a-corpus, --a-queries, --b-corpus and --b-queries must be given together");
        }
        a = {read_embeddings(o.corpus_file, 'd'), read_embeddings(o.query_file, 'q')};
        b = {read_embeddings(o.b_corpus_file, 'd'), read_embeddings(o.b_query_file, 'q')};
      } else {
        a = load_data(o, o.seed);
        if (o.dims_b != 0) o.dims = o.dims_b;
        b = load_data(o, o.seed + 1);
      }
      finish(scenario_cross_embedding(a, b, o.k), o, out);
    } else if (precision->parsed()) {
      PrecisionScenarioSpec spec;
      spec.corpus_seed = o.seed;
      spec.rows = precision->count("--docs") ? o.docs : 1000;
      spec.dims = o.dims;
      spec.n_runs = o.runs;
      finish(scenario_precision(spec), o, out);
    } else if (distributed->parsed()) {
      const auto [docs, qs] = load_data(o, o.seed);
      DistributedScenarioSpec spec;
      spec.k = o.k;
      spec.n_nodes = o.nodes;
      spec.seed = o.seed;
      spec.n_runs = o.runs;
      spec.indexes = expand_indexes(o.indexes, spec.indexes);
      if (!o.sharding.empty()) {
        spec.strategies.clear();
        for (const auto& s : o.sharding) spec.strategies.push_back(parse_sharding(s));
      }
      spec.transport = parse_transport(o.transport);
      finish(scenario_distributed(docs, qs, spec, {1, o.parallel}), o, out);
    } else if (csv->parsed()) {
      const auto files = emit_plot_csv(read_report(o.in), o.out);
      for (const auto& f : files) out << f.string() << '\n';
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace reprobench
