#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "reprobench/distributed.hpp"
#include "reprobench/errors.hpp"
#include "reprobench/harness.hpp"
#include "reprobench/index.hpp"
#include "reprobench/io.hpp"
#include "reprobench/metrics.hpp"
#include "reprobench/precision.hpp"
#include "reprobench/synthetic.hpp"

namespace py = pybind11;
using namespace reprobench;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-d float array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto dims = static_cast<std::size_t>(a.shape(1));
  return EmbeddingMatrix(rows, dims, std::vector<float>(a.data(), a.data() + rows * dims));
}

py::array_t<float> to_array(const EmbeddingMatrix& m) {
  py::array_t<float> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.dims())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

VectorSet make_set(std::optional<std::vector<std::string>> ids, const FloatArray& a, char prefix) {
  auto m = to_matrix(a);
  if (!ids) {
    ids.emplace();
    for (std::size_t i = 0; i < m.rows(); ++i) ids->push_back(padded_id(prefix, i, m.rows()));
  }
  return VectorSet(std::move(*ids), std::move(m));
}

ResultList as_list(const std::vector<std::string>& ids) {
  ResultList r;
  double s = 0;
  for (const auto& id : ids) r.entries.push_back({id, s += 1});
  return r;
}

py::list results_to_py(const std::vector<ResultList>& lists) {
  py::list out;
  for (const auto& l : lists) {
    py::list entries;
    for (const auto& e : l.entries) entries.append(py::make_tuple(e.doc_id, e.score));
    out.append(entries);
  }
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object report_to_py(const ReproReport& r) { return json_to_py(report_to_json(r)); }

IndexParams params_of(const py::object& spec) {
  if (py::isinstance<py::str>(spec)) return index_preset(spec.cast<std::string>());
  return index_params_from_json(py_to_json(spec));
}

ShardingStrategy strategy_of(const std::string& name, std::uint64_t seed) {
  return ShardingStrategy{parse_sharding(name), parse_sharding(name) == ShardingStrategy::Kind::Random ? seed : 0};
}

py::dict drift_to_py(const DriftMatrix& d) {
  py::dict out;
  py::list formats;
  for (Precision p : d.formats) formats.append(std::string(to_string(p)));
  out["formats"] = formats;
  out["l2"] = d.l2;
  out["cosine"] = d.cosine;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reproducibility benchmarks for vector retrieval";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<VectorSet>(m, "VectorSet")
      .def(py::init([](const FloatArray& a, std::optional<std::vector<std::string>> ids, char prefix) {
             return make_set(std::move(ids), a, prefix);
           }),
           py::arg("embeddings"), py::arg("ids") = py::none(), py::arg("prefix") = 'd')
      .def_property_readonly("ids", &VectorSet::ids)
      .def_property_readonly("embeddings", [](const VectorSet& v) { return to_array(v.embeddings()); })
      .def_property_readonly("dims", &VectorSet::dims)
      .def_property_readonly("fingerprint", [](const VectorSet& v) { return vector_set_fingerprint(v); })
      .def("__len__", &VectorSet::size)
      .def("slice", &VectorSet::slice, py::arg("first"), py::arg("count"))
      .def(py::self == py::self);

  m.def(
      "gen_synthetic",
      [](std::uint64_t seed, std::size_t n_docs, std::size_t n_queries, std::size_t dims, std::size_t clusters,
         double noise) {
        auto [docs, qs] = gen_synthetic({seed, n_docs, n_queries, dims, clusters, noise});
        return py::make_tuple(VectorSet(std::move(docs)), VectorSet(std::move(qs)));
      },
      py::arg("seed") = 42, py::arg("n_docs") = 10000, py::arg("n_queries") = 100, py::arg("dims") = 128,
      py::arg("clusters") = 32, py::arg("noise") = 0.5);
  m.def("unit_gaussian_matrix",
        [](std::uint64_t seed, std::size_t n, std::size_t dims) { return to_array(unit_gaussian_matrix(seed, n, dims)); },
        py::arg("seed"), py::arg("n"), py::arg("dims"));

  // Metrics over id lists.
  m.def("jaccard", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return jaccard(IdSet(a.begin(), a.end()), IdSet(b.begin(), b.end()));
  });
  m.def("overlap_coefficient", [](const std::vector<std::string>& v1, const std::vector<std::string>& v2) {
    const auto o = overlap_coefficient(as_list(v1), as_list(v2));
    return py::make_tuple(o.count, o.coefficient);
  });
  m.def("kendall_tau", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto t = kendall_tau(as_list(a), as_list(b));
    return py::make_tuple(t.tau, t.p_value);
  });
  m.def(
      "rbo",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b, double p, std::optional<std::size_t> depth) {
        return rbo(as_list(a), as_list(b), p, depth.value_or(std::max(a.size(), b.size())));
      },
      py::arg("a"), py::arg("b"), py::arg("p") = kDefaultRboPersistence, py::arg("depth") = py::none());
  m.def("agreement", [](const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
    const auto s = agreement(as_list(a), as_list(b), p);
    py::dict d;
    d["overlap_count"] = s.overlap_count;
    d["overlap_coefficient"] = s.overlap_coefficient;
    d["jaccard"] = s.jaccard;
    d["rbo"] = s.rbo;
    d["kendall_tau"] = s.kendall_tau;
    d["tau_p_value"] = s.tau_p_value;
    return d;
  }, py::arg("a"), py::arg("b"), py::arg("p") = kDefaultRboPersistence);

  // Precision.
  m.def("quantize", [](const FloatArray& a, const std::string& fmt) {
    return to_array(quantize(to_matrix(a), parse_precision(fmt)));
  }, py::arg("embeddings"), py::arg("precision"));
  m.def("quantize_value", [](float x, const std::string& fmt) { return quantize_value(x, parse_precision(fmt)); });
  m.def("drift_matrix", [](const FloatArray& a) { return drift_to_py(drift_matrix(to_matrix(a))); });

  // Indexes.
  py::class_<VectorIndex, std::unique_ptr<VectorIndex>>(m, "Index")
      .def(py::init([](const py::object& params, const VectorSet& corpus, std::uint64_t seed) {
             return build_index(params_of(params), DocumentCorpus(corpus), seed);
           }),
           py::arg("params"), py::arg("corpus"), py::arg("seed") = 0)
      .def("search",
           [](const VectorIndex& idx, const VectorSet& queries, std::size_t k, std::size_t threads) {
             return results_to_py(idx.search(QuerySet(queries), k, threads));
           },
           py::arg("queries"), py::arg("k"), py::arg("threads") = 1)
      .def("add", [](VectorIndex& idx, const VectorSet& docs) { idx.add(DocumentCorpus(docs)); })
      .def("save", [](const VectorIndex& idx) {
        std::ostringstream out;
        save_index(idx, out);
        return py::bytes(out.str());
      })
      .def_static("load", [](const py::bytes& blob) {
        std::istringstream in{std::string(blob)};
        return load_index(in);
      })
      .def_property_readonly("params", [](const VectorIndex& idx) { return json_to_py(to_json(idx.params())); })
      .def_property_readonly("seed", &VectorIndex::seed)
      .def_property_readonly("dims", &VectorIndex::dims)
      .def("__len__", &VectorIndex::size)
      .def("centroids", [](const VectorIndex& idx) -> py::object {
        const auto c = idx.centroids();
        if (!c) return py::none();
        return to_array(EmbeddingMatrix(c->nlist, c->dims, c->data));
      });
  m.def("index_presets", &index_preset_names);

  // Distribution.
  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); });
  m.def(
      "shard",
      [](const VectorSet& corpus, std::size_t n_nodes, const std::string& strategy, std::uint64_t seed) {
        return shard(DocumentCorpus(corpus), n_nodes, strategy_of(strategy, seed)).node_of;
      },
      py::arg("corpus"), py::arg("n_nodes"), py::arg("strategy") = "hash", py::arg("seed") = 0);
  m.def(
      "merge_candidates",
      [](const std::vector<std::vector<std::pair<std::string, double>>>& batches, std::size_t k,
         const std::string& metric) {
        std::vector<CandidateBatch> b;
        for (std::size_t i = 0; i < batches.size(); ++i) {
          CandidateBatch cb{static_cast<std::uint32_t>(i), "q", {}};
          for (const auto& [id, score] : batches[i]) cb.entries.push_back({id, score});
          b.push_back(std::move(cb));
        }
        const auto kind = metric == "inner_product" ? MetricKind::InnerProduct : MetricKind::Distance;
        py::list merged = results_to_py({merge_candidates(b, k, kind)});
        return py::list(merged[0]);
      },
      py::arg("batches"), py::arg("k"), py::arg("metric") = "distance");
  m.def(
      "distributed_search",
      [](const VectorSet& corpus, const VectorSet& queries, std::size_t k, std::size_t n_nodes,
         const std::string& strategy, const py::object& params, std::uint64_t seed, const std::string& transport) {
        DistributedOptions opts;
        opts.transport = parse_transport(transport);
        const auto index_params = params_of(params);
        std::vector<ResultList> res;
        {
          py::gil_scoped_release release;
          res = distributed_search(DocumentCorpus(corpus), QuerySet(queries), k, n_nodes,
                                   strategy_of(strategy, seed), index_params, seed, opts);
        }
        return results_to_py(res);
      },
      py::arg("corpus"), py::arg("queries"), py::arg("k"), py::arg("n_nodes"), py::arg("strategy") = "hash",
      py::arg("params") = "flat_l2", py::arg("seed") = 42, py::arg("transport") = "inproc");

  // Scenarios return report dicts.
  m.def(
      "scenario_stability",
      [](const VectorSet& corpus, const VectorSet& queries, std::vector<std::string> presets, std::size_t k,
         std::size_t runs, std::uint64_t seed, bool nondeterministic, const std::string& precision) {
        ExperimentConfig base;
        base.k = k;
        base.n_runs = runs;
        base.precision = parse_precision(precision);
        base.seed_policy = nondeterministic ? SeedPolicy::non_deterministic() : SeedPolicy::deterministic(seed);
        if (presets.empty()) presets = index_preset_names();
        return report_to_py(scenario_stability(presets, base, DocumentCorpus(corpus), QuerySet(queries)));
      },
      py::arg("corpus"), py::arg("queries"), py::arg("presets") = std::vector<std::string>{}, py::arg("k") = 50,
      py::arg("runs") = 5, py::arg("seed") = 42, py::arg("nondeterministic") = false, py::arg("precision") = "FP32");
  m.def(
      "scenario_insertion",
      [](const VectorSet& corpus, const VectorSet& queries, const py::object& params, double split, std::size_t k,
         std::uint64_t seed) {
        return report_to_py(scenario_insertion(params_of(params), DocumentCorpus(corpus), split, QuerySet(queries), k, seed));
      },
      py::arg("corpus"), py::arg("queries"), py::arg("params") = "hnsw", py::arg("split") = 0.8, py::arg("k") = 50,
      py::arg("seed") = 42);
  m.def(
      "scenario_cross_embedding",
      [](const VectorSet& a_docs, const VectorSet& a_queries, const VectorSet& b_docs, const VectorSet& b_queries,
         std::size_t k) {
        return report_to_py(scenario_cross_embedding({DocumentCorpus(a_docs), QuerySet(a_queries)},
                                                     {DocumentCorpus(b_docs), QuerySet(b_queries)}, k));
      },
      py::arg("a_docs"), py::arg("a_queries"), py::arg("b_docs"), py::arg("b_queries"), py::arg("k") = 50);
  m.def(
      "scenario_precision",
      [](std::uint64_t seed, std::size_t rows, std::size_t dims, std::size_t runs) {
        PrecisionScenarioSpec spec;
        spec.corpus_seed = seed;
        spec.rows = rows;
        spec.dims = dims;
        spec.n_runs = runs;
        return report_to_py(scenario_precision(spec));
      },
      py::arg("seed") = 42, py::arg("rows") = 1000, py::arg("dims") = 128, py::arg("runs") = 5);
  m.def(
      "scenario_distributed",
      [](const VectorSet& corpus, const VectorSet& queries, std::vector<std::string> indexes,
         std::vector<std::string> strategies, std::size_t n_nodes, std::size_t k, std::size_t runs, std::uint64_t seed,
         const std::string& transport) {
        DistributedScenarioSpec spec;
        spec.k = k;
        spec.n_nodes = n_nodes;
        spec.n_runs = runs;
        spec.seed = seed;
        spec.transport = parse_transport(transport);
        if (!indexes.empty()) spec.indexes = indexes;
        if (!strategies.empty()) {
          spec.strategies.clear();
          for (const auto& s : strategies) spec.strategies.push_back(parse_sharding(s));
        }
        return report_to_py(scenario_distributed(DocumentCorpus(corpus), QuerySet(queries), spec));
      },
      py::arg("corpus"), py::arg("queries"), py::arg("indexes") = std::vector<std::string>{},
      py::arg("strategies") = std::vector<std::string>{}, py::arg("n_nodes") = 4, py::arg("k") = 50,
      py::arg("runs") = 5, py::arg("seed") = 42, py::arg("transport") = "inproc");

  // Files.
  m.def("write_embeddings", [](const std::filesystem::path& p, const VectorSet& v, bool with_ids) {
    write_embeddings(p, v, with_ids);
  }, py::arg("path"), py::arg("vectors"), py::arg("with_ids") = true);
  m.def("read_embeddings", &read_embeddings, py::arg("path"), py::arg("default_prefix") = 'd');
  m.def("redact_metadata", [](const py::object& report) { return json_to_py(redact_metadata(py_to_json(report))); });
  m.def("emit_plot_csv", [](const py::object& report, const std::filesystem::path& out_dir) {
    return emit_plot_csv(report_from_json(py_to_json(report)), out_dir);
  });
}
