#pragma once

#include "cvdoe/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvdoe {

/// Parsed run configuration.
///
/// INI text: a [run] section with `seed` (and optionally `output`, `threads`
/// and any scenario key as a default for every scenario), then one
/// [scenario NAME] section per scenario.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string output = "results";
    /// 0: not set.
    int threads = 0;
    std::vector<ScenarioSpec> scenarios;
};

/// Builds a design from "ccd m=3 alpha=1 centers=2 [fraction=half]",
/// "bbd m=3 centers=3", or a CSV path (relative paths resolve against base_dir).
Design make_design(const std::string& ref, const std::filesystem::path& base_dir);

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Every effective setting in the parseable format. Design files are written
/// as absolute paths; `output` and `threads` are left out so the text (and its
/// hash) depends only on what determines the records.
std::string effective_config(const RunConfig& cfg);

} // namespace cvdoe
