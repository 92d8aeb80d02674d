#include <fstream>
#include <sstream>

#include "reprobench/errors.hpp"
#include "reprobench/io.hpp"

namespace reprobench {

namespace {

// Shortest round-trip decimal form.
std::string num(double v) { return nlohmann::json(v).dump(); }

std::string file_safe(std::string name) {
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
  }
  return name;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  written.push_back(path);
}

std::string matrix_csv(const DriftMatrix& m, const std::array<std::array<double, 4>, 4>& v) {
  std::ostringstream s;
  s << "format";
  for (auto f : m.formats) s << ',' << to_string(f);
  s << '\n';
  for (std::size_t i = 0; i < 4; ++i) {
    s << to_string(m.formats[i]);
    for (std::size_t j = 0; j < 4; ++j) s << ',' << num(v[i][j]);
    s << '\n';
  }
  return s.str();
}

}  // namespace

std::vector<std::filesystem::path> emit_plot_csv(const ReproReport& report,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;

  const std::string prefix = report.scenario == "insertion"         ? "fig1_"
                             : report.scenario == "cross_embedding" ? "fig2_"
                                                                    : "per_query_";
  for (const auto& cell : report.cells) {
    if (cell.metrics.empty()) continue;
    std::ostringstream s;
    s << "query_id";
    for (const auto& [name, series] : cell.metrics) s << ',' << name;
    s << '\n';
    for (std::size_t q = 0; q < report.query_ids.size(); ++q) {
      s << csv_field(report.query_ids[q]);
      for (const auto& [name, series] : cell.metrics) {
        s << ',';
        if (series.raw.at(q)) s << num(*series.raw[q]);
      }
      s << '\n';
    }
    write_file(out_dir / (prefix + file_safe(cell.name) + ".csv"), s.str(), written);
  }

  if (report.drift) {
    write_file(out_dir / "fig3_drift_l2.csv", matrix_csv(*report.drift, report.drift->l2), written);
    write_file(out_dir / "fig3_drift_cosine.csv", matrix_csv(*report.drift, report.drift->cosine), written);
  }

  if (report.metadata.contains("latency")) {
    std::ostringstream s;
    s << "config,mean_ms\n";
    for (const auto& [name, v] : report.metadata.at("latency").items()) {
      s << csv_field(name) << ',' << num(v.at("mean_ms").get<double>()) << '\n';
    }
    write_file(out_dir / "fig4_latency.csv", s.str(), written);
  }

  std::ostringstream s;
  s << "cell,metric,mean,median,min,max,std,n_queries,exclusions\n";
  for (const auto& cell : report.cells) {
    for (const auto& [name, series] : cell.metrics) {
      s << csv_field(cell.name) << ',' << name;
      if (series.summary) {
        const auto& d = *series.summary;
        s << ',' << num(d.mean) << ',' << num(d.median) << ',' << num(d.min) << ',' << num(d.max) << ','
          << num(d.std) << ',' << d.n_queries;
      } else {
        s << ",,,,,,0";
      }
      s << ',' << series.exclusions << '\n';
    }
  }
  write_file(out_dir / "summary.csv", s.str(), written);
  return written;
}

}  // namespace reprobench
