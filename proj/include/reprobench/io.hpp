#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "reprobench/harness.hpp"
#include "reprobench/types.hpp"

namespace reprobench {

// ---------------------------------------------------------------------------
// RRE1 embedding files: "RRE1" | u16 version | u32 dims | u64 count |
// u8 dtype (0 = FP32) | count*dims little-endian floats. Ids live in an
// optional sidecar "<path>.ids", one per line.

inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;

std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Writes the matrix and, when `with_ids`, the sidecar.
void write_embeddings(const std::filesystem::path& path, const VectorSet& set, bool with_ids = true);

/// Reads a file (and its sidecar, if present). Without a sidecar the ids
/// are padded_id(default_prefix, i, count).
VectorSet read_embeddings(const std::filesystem::path& path, char default_prefix = 'd');

// ---------------------------------------------------------------------------
// Reports

inline constexpr int kReportFormatVersion = 1;

nlohmann::json report_to_json(const ReproReport& report);
ReproReport report_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
void write_report(const ReproReport& report, const std::filesystem::path& path);
ReproReport read_report(const std::filesystem::path& path);

/// Copy of a serialized report with the metadata block emptied.
nlohmann::json redact_metadata(nlohmann::json report);

/// One CSV per figure analogue. Returns the files written, in order.
///  - fig1_<cell>.csv / fig2_<cell>.csv / per_query_<cell>.csv: one row per query
///  - fig3_drift_l2.csv, fig3_drift_cosine.csv: 4x4 format matrices
///  - fig4_latency.csv: per-cell latency
///  - summary.csv: every metric distribution
std::vector<std::filesystem::path> emit_plot_csv(const ReproReport& report,
                                                 const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Command line

/// Exit codes: 0 success, 1 runtime error, 2 validation error or bad usage.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace reprobench
