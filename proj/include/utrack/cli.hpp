#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "utrack/io.hpp"
#include "utrack/synth.hpp"
#include "utrack/tracker.hpp"

namespace utrack::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point behind the `utrack` binary. args excludes the program name.
/// Returns the process exit status; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct TrackJob {
    std::filesystem::path detections;
    std::filesystem::path results;
    TrackerConfig config;
    std::uint64_t seed = 0;
};

/// Runs the tracker over a detection file and writes the results. Returns the run manifest.
nlohmann::json run_track(const TrackJob& job, std::ostream& err);

struct SynthJob {
    ScenarioSpec scenario;
    std::filesystem::path detections;
    std::filesystem::path gt;
    io::CovArity cov = io::CovArity::Full10;
};

nlohmann::json run_synth(const SynthJob& job);

/// Re-executes the run recorded in a manifest. With out_dir set, outputs are
/// written there under their original file names instead of their recorded paths.
void replay(const nlohmann::json& manifest, const std::filesystem::path& out_dir);

}  // namespace utrack::cli
