#pragma once

#include <string>
#include <vector>

#include "ftg/config.hpp"
#include "ftg/seqgen.hpp"

namespace ftg {

inline constexpr const char* kToolVersion = "0.1.0";

struct TargetRecord {
    std::string file;
    std::string sequence;  // "f1 -> f2 -> f4"
    std::size_t min_buffer_len = 0;
};

/// Everything needed to reproduce a generation run byte for byte.
struct RunManifest {
    std::string tool_version;
    std::string spec_path;
    std::string out_dir;
    GenerationConfig config;
    std::vector<TargetRecord> targets;
    CoverageStats stats;
};

std::string manifest_to_json(const RunManifest& manifest);

/// Throws ManifestError naming the first missing or ill-typed field.
RunManifest manifest_from_json(const std::string& text);

struct GenerateResult {
    RunManifest manifest;
    std::size_t candidates_considered = 0;
};

/// Full pipeline: parse spec, build graph, generate and refine sequences,
/// render one target file per selection, write sequences.txt and
/// manifest.json under out_dir. Optionally writes the graph as dot text.
GenerateResult run_generate(const std::string& spec_path, const std::string& out_dir,
                            const GenerationConfig& config, const std::string& emit_dot_path = "",
                            ExecutionMode mode = ExecutionMode::Parallel);

/// Stats lines for a manifest, e.g. "coverage 1.00 (5/5), targets 2".
std::string format_stats_report(const RunManifest& manifest);

std::string read_text_file(const std::string& path);  // throws on unreadable
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ftg
