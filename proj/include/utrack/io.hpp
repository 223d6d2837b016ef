#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "utrack/motmetrics.hpp"
#include "utrack/tracker.hpp"

namespace utrack::io {

/// How detection covariances are serialized: absent, 4 diagonal variances, or
/// the 10 upper-triangular entries (row-major) of the full 4x4 matrix.
enum class CovArity { None, Diag4, Full10 };

const char* to_string(CovArity a);
CovArity parse_cov_arity(std::string_view s);

/// Eigenvalues down to -kPsdTolerance are clamped to zero on load; anything more negative is rejected.
inline constexpr double kPsdTolerance = 1e-9;

// Detection CSV
//
//   cov=<none|diag4|full10>[,frames=<n>]
//   frame,x1,y1,x2,y2,score,label[,covariance values...]
//
// Lines starting with '#' and blank lines are ignored. Numbers are written in
// shortest round-trip form, so write-then-load is bit exact.
Sequence parse_detections(std::string_view text);
Sequence load_detections(const std::filesystem::path& path);
std::string format_detections(const Sequence& seq, CovArity arity);
void write_detections(const std::filesystem::path& path, const Sequence& seq, CovArity arity);

// Ground-truth CSV (MOTChallenge-style): frame,id,x,y,w,h,label,visibility
// An optional "# frames=<n>" comment extends the frame range past the last row.
GtSequence parse_gt(std::string_view text);
GtSequence load_gt(const std::filesystem::path& path);
std::string format_gt(const GtSequence& gt);
void write_gt(const std::filesystem::path& path, const GtSequence& gt);

// Results CSV: frame,id,x,y,w,h,score,label,-1,-1 with three decimals, ordered by frame then id.
std::vector<FrameResult> parse_results(std::string_view text);
std::vector<FrameResult> load_results(const std::filesystem::path& path);
std::string format_results(std::span<const FrameResult> results);
void write_results(const std::filesystem::path& path, std::span<const FrameResult> results);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
/// Fixed three-decimal representation; negative zero prints as 0.000.
std::string format_fixed3(double v);

}  // namespace utrack::io
