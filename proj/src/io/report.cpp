#include <fstream>
#include <sstream>

#include "reprobench/errors.hpp"
#include "reprobench/io.hpp"

namespace reprobench {

namespace {

using nlohmann::json;

constexpr const char* kReportFormat = "reprobench-report";

json to_json(const MetricDistribution& d) {
  return {{"mean", d.mean}, {"median", d.median}, {"min", d.min},
          {"max", d.max},   {"std", d.std},       {"n_queries", d.n_queries}};
}

MetricDistribution distribution_from_json(const json& j) {
  MetricDistribution d;
  d.mean = j.at("mean").get<double>();
  d.median = j.at("median").get<double>();
  d.min = j.at("min").get<double>();
  d.max = j.at("max").get<double>();
  d.std = j.at("std").get<double>();
  d.n_queries = j.at("n_queries").get<std::size_t>();
  return d;
}

json to_json(const MetricSeries& s) {
  json raw = json::array();
  for (const auto& v : s.raw) raw.push_back(v ? json(*v) : json(nullptr));
  return {{"summary", s.summary ? to_json(*s.summary) : json(nullptr)},
          {"exclusions", s.exclusions},
          {"raw", std::move(raw)}};
}

MetricSeries series_from_json(const json& j) {
  MetricSeries s;
  for (const auto& v : j.at("raw")) {
    s.raw.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  }
  s.exclusions = j.at("exclusions").get<std::size_t>();
  if (!j.at("summary").is_null()) s.summary = distribution_from_json(j.at("summary"));
  return s;
}

json to_json(const DriftMatrix& m) {
  json formats = json::array();
  for (auto f : m.formats) formats.push_back(std::string(to_string(f)));
  return {{"formats", formats}, {"l2", m.l2}, {"cosine", m.cosine}};
}

DriftMatrix drift_from_json(const json& j) {
  DriftMatrix m;
  const auto& formats = j.at("formats");
  if (formats.size() != 4) throw ValidationError("report: drift matrix needs 4 formats");
  for (std::size_t i = 0; i < 4; ++i) m.formats[i] = parse_precision(formats[i].get<std::string>());
  m.l2 = j.at("l2").get<std::array<std::array<double, 4>, 4>>();
  m.cosine = j.at("cosine").get<std::array<std::array<double, 4>, 4>>();
  return m;
}

}  // namespace

json report_to_json(const ReproReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json metrics = json::object();
    for (const auto& [name, s] : c.metrics) metrics[name] = to_json(s);
    cells.push_back({{"name", c.name}, {"metrics", metrics}, {"scalars", c.scalars}, {"labels", c.labels}});
  }
  return {{"format", kReportFormat},
          {"version", kReportFormatVersion},
          {"scenario", r.scenario},
          {"config", r.config},
          {"fingerprints", r.fingerprints},
          {"query_ids", r.query_ids},
          {"cells", std::move(cells)},
          {"drift", r.drift ? to_json(*r.drift) : json(nullptr)},
          {"annotations", r.annotations},
          {"metadata", r.metadata}};
}

ReproReport report_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kReportFormat) {
      throw ValidationError("report: not a reprobench report");
    }
    const int version = j.at("version").get<int>();
    if (version != kReportFormatVersion) {
      throw ValidationError("report: unsupported version " + std::to_string(version));
    }
    ReproReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.config = j.at("config");
    r.fingerprints = j.at("fingerprints").get<std::vector<std::string>>();
    r.query_ids = j.at("query_ids").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      ReportCell cell;
      cell.name = c.at("name").get<std::string>();
      for (const auto& [name, s] : c.at("metrics").items()) {
        auto series = series_from_json(s);
        if (series.raw.size() != r.query_ids.size()) {
          throw ValidationError("report: metric '" + name + "' has " + std::to_string(series.raw.size()) +
                                " values for " + std::to_string(r.query_ids.size()) + " queries");
        }
        cell.metrics.emplace(name, std::move(series));
      }
      cell.scalars = c.at("scalars").get<std::map<std::string, double>>();
      cell.labels = c.at("labels").get<std::map<std::string, std::string>>();
      r.cells.push_back(std::move(cell));
    }
    if (!j.at("drift").is_null()) r.drift = drift_from_json(j.at("drift"));
    r.annotations = j.at("annotations");
    r.metadata = j.at("metadata");
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: malformed document: ") + e.what());
  }
}

void write_report(const ReproReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw RuntimeError("cannot write report '" + path.string() + "'");
}

ReproReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open report '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("report '" + path.string() + "': invalid JSON: " + e.what());
  }
  return report_from_json(j);
}

json redact_metadata(json report) {
  if (report.is_object()) report["metadata"] = json::object();
  return report;
}

}  // namespace reprobench
