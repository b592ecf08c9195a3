#include "ftg/driver.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftg/errors.hpp"
#include "ftg/synth.hpp"
#include "json.hpp"

namespace ftg {

namespace {

using nlohmann::json;

json config_to_json(const GenerationConfig& config) {
    return json{{"max_len", config.max_len},
                {"rng_seed", config.rng_seed},
                {"max_chain_depth", config.max_chain_depth},
                {"allow_pointer_deref", config.allow_pointer_deref},
                {"frontier_cap", config.frontier_cap}};
}

template <typename T>
T require_manifest_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ManifestError("manifest missing field \"" + std::string(key) + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ManifestError("manifest field \"" + std::string(key) + "\" has the wrong type");
    }
}

std::string sequence_text(const DependencyGraph& graph, const ApiSequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.calls.size(); ++i) {
        if (i) out += " -> ";
        out += graph.api_nodes[seq.calls[i]].function.id;
    }
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string manifest_to_json(const RunManifest& manifest) {
    json targets = json::array();
    for (const TargetRecord& t : manifest.targets) {
        targets.push_back(json{{"file", t.file},
                               {"sequence", t.sequence},
                               {"min_buffer_len", t.min_buffer_len}});
    }
    json coverage{{"apis_total", manifest.stats.apis_total},
                  {"apis_covered", manifest.stats.apis_covered},
                  {"producer_edges_total", manifest.stats.producer_edges_total},
                  {"producer_edges_covered", manifest.stats.producer_edges_covered},
                  {"targets", manifest.stats.targets},
                  {"total_call_occurrences", manifest.stats.total_call_occurrences},
                  {"avg_visits_per_api", format_ratio(manifest.stats.avg_visits_per_api())},
                  {"covered_unfuzzable", manifest.stats.covered_unfuzzable}};
    json doc{{"tool_version", manifest.tool_version},
             {"spec_path", manifest.spec_path},
             {"out_dir", manifest.out_dir},
             {"rng_seed", manifest.config.rng_seed},
             {"config", config_to_json(manifest.config)},
             {"targets", targets},
             {"coverage", coverage}};
    return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");

    RunManifest m;
    m.tool_version = require_manifest_field<std::string>(doc, "tool_version");
    m.spec_path = require_manifest_field<std::string>(doc, "spec_path");
    m.out_dir = require_manifest_field<std::string>(doc, "out_dir");

    json config = require_manifest_field<json>(doc, "config");
    m.config.max_len = require_manifest_field<int>(config, "max_len");
    m.config.rng_seed = require_manifest_field<std::uint64_t>(config, "rng_seed");
    m.config.max_chain_depth = require_manifest_field<int>(config, "max_chain_depth");
    m.config.allow_pointer_deref = require_manifest_field<bool>(config, "allow_pointer_deref");
    m.config.frontier_cap = require_manifest_field<std::size_t>(config, "frontier_cap");

    json targets = require_manifest_field<json>(doc, "targets");
    if (!targets.is_array()) throw ManifestError("manifest field \"targets\" must be an array");
    for (const json& t : targets) {
        TargetRecord rec;
        rec.file = require_manifest_field<std::string>(t, "file");
        rec.sequence = require_manifest_field<std::string>(t, "sequence");
        rec.min_buffer_len = require_manifest_field<std::size_t>(t, "min_buffer_len");
        m.targets.push_back(std::move(rec));
    }

    json coverage = require_manifest_field<json>(doc, "coverage");
    m.stats.apis_total = require_manifest_field<std::size_t>(coverage, "apis_total");
    m.stats.apis_covered = require_manifest_field<std::size_t>(coverage, "apis_covered");
    m.stats.producer_edges_total =
        require_manifest_field<std::size_t>(coverage, "producer_edges_total");
    m.stats.producer_edges_covered =
        require_manifest_field<std::size_t>(coverage, "producer_edges_covered");
    m.stats.targets = require_manifest_field<std::size_t>(coverage, "targets");
    m.stats.total_call_occurrences =
        require_manifest_field<std::size_t>(coverage, "total_call_occurrences");
    m.stats.covered_unfuzzable =
        require_manifest_field<std::vector<std::string>>(coverage, "covered_unfuzzable");
    return m;
}

GenerateResult run_generate(const std::string& spec_path, const std::string& out_dir,
                            const GenerationConfig& config, const std::string& emit_dot_path,
                            ExecutionMode mode) {
    ApiSpec spec = parse_api_spec(read_text_file(spec_path));
    DependencyGraph graph = build_graph(spec, config);

    std::filesystem::create_directories(out_dir);
    if (!emit_dot_path.empty()) write_text_file(emit_dot_path, export_dot(graph));

    SequenceSet candidates = bfs_with_pruning(graph, config, mode);
    SequenceSet deep = backward_search(graph, candidates, config);
    candidates.insert(candidates.end(), deep.begin(), deep.end());

    SequenceSet selected = refine(candidates, graph, config);
    CoverageStats stats = coverage_report(selected, graph);
    stats.covered_unfuzzable = covered_unfuzzable_apis(candidates, graph);

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.spec_path = spec_path;
    manifest.out_dir = out_dir;
    manifest.config = config;
    manifest.stats = stats;

    RustRenderer renderer;
    RenderOptions render_options;
    render_options.library_name = spec.library_name;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const ApiSequence& seq = selected[k];
        ProgramPlan plan = plan_program(seq, graph, config);
        InputLayout layout = plan_input_layout(plan, graph);
        std::string source = render_target(plan, layout, graph, render_options, &renderer);

        std::string first_id = graph.api_nodes[seq.calls.front()].function.id;
        std::string file =
            "target_" + std::to_string(k) + "_" + first_id + "." + renderer.file_extension();
        write_text_file(out_dir + "/" + file, source);
        manifest.targets.push_back(TargetRecord{file, sequence_text(graph, seq),
                                                layout.min_buffer_len});
    }

    write_text_file(out_dir + "/sequences.txt", dump_sequences(selected, graph, stats));
    write_text_file(out_dir + "/manifest.json", manifest_to_json(manifest));

    GenerateResult result;
    result.manifest = std::move(manifest);
    result.candidates_considered = candidates.size();
    return result;
}

std::string format_stats_report(const RunManifest& manifest) {
    const CoverageStats& s = manifest.stats;
    double coverage = s.apis_total == 0 ? 0.0
                                        : static_cast<double>(s.apis_covered) /
                                              static_cast<double>(s.apis_total);
    std::ostringstream out;
    out << "spec: " << manifest.spec_path << "\n";
    out << "coverage " << format_ratio(coverage) << " (" << s.apis_covered << "/" << s.apis_total
        << "), targets " << s.targets << "\n";
    double edge_cov = s.producer_edges_total == 0
                          ? 0.0
                          : static_cast<double>(s.producer_edges_covered) /
                                static_cast<double>(s.producer_edges_total);
    out << "producer edges " << format_ratio(edge_cov) << " (" << s.producer_edges_covered << "/"
        << s.producer_edges_total << ")\n";
    out << "avg visits per api " << format_ratio(s.avg_visits_per_api()) << "\n";
    if (!s.covered_unfuzzable.empty()) {
        out << "covered but unfuzzable:";
        for (const std::string& id : s.covered_unfuzzable) out << " " << id;
        out << "\n";
    }
    return out.str();
}

}  // namespace ftg
