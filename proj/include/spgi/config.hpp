#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "spgi/pipeline.hpp"

namespace spgi {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Load a plain-text "section.key = value" configuration. Unknown keys and
/// malformed lines abort with the offending line number; relative paths are
/// resolved against the config file's directory.
PipelineConfig load_run_config(const std::filesystem::path& file);

/// Parse config text directly (paths resolved against `dir`); used by the
/// loader and by tests.
PipelineConfig parse_run_config(const std::string& text, const std::filesystem::path& dir,
                                const std::string& origin = "<string>");

/// Write a fully resolved config; feeding it back into load_run_config
/// reproduces the run bit for bit.
void write_manifest(const PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace spgi
