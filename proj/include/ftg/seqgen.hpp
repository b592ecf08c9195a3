#pragma once

#include <string>
#include <vector>

#include "ftg/config.hpp"
#include "ftg/dep_graph.hpp"

namespace ftg {

using SequenceSet = std::vector<ApiSequence>;

/// Serial runs the reference single-thread expansion; Parallel expands each
/// BFS level across OpenMP threads and merges in frontier order. Both
/// produce byte-identical output.
enum class ExecutionMode { Serial, Parallel };

/// All valid sequences of length <= config.max_len, never extending past an
/// end-terminated sequence, with dead-node-bearing sequences filtered at the
/// end. Output is ordered by length, then lexicographically on function ids.
/// Throws FrontierExplosionError when a level exceeds config.frontier_cap.
SequenceSet bfs_with_pruning(const DependencyGraph& graph, const GenerationConfig& config,
                             ExecutionMode mode = ExecutionMode::Parallel);

/// True iff the sequence's last call is an end node (mutation-aware).
bool end_node_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq);

/// True (= redundant) iff some non-final call is a dead node: neither a
/// param node it can produce nor one it mutates is consumed by any later
/// call in the sequence.
bool redundancy_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq);

/// Covers APIs the given set missed by concatenating already-generated
/// sequences whose last calls produce each demanded slot, then appending the
/// target. Iterates to fixpoint. Dependency choice is deterministic:
/// shortest sequence first, ties by function ids.
SequenceSet backward_search(const DependencyGraph& graph, const SequenceSet& covered,
                            const GenerationConfig& config);

/// Greedy set-cover refinement. Drops candidates without primitive input,
/// then repeatedly selects by: more new API nodes, more new producer edges,
/// shorter length, presence of dynamic-length primitive input, seeded random
/// choice. Returns selections in selection order.
SequenceSet refine(const SequenceSet& candidates, const DependencyGraph& graph,
                   const GenerationConfig& config);

struct CoverageStats {
    std::size_t apis_total = 0;
    std::size_t apis_covered = 0;
    std::size_t producer_edges_total = 0;
    std::size_t producer_edges_covered = 0;
    std::size_t targets = 0;
    std::size_t total_call_occurrences = 0;
    /// APIs reachable only through sequences with no primitive input; they
    /// are dropped from selection but reported here instead of silently lost.
    std::vector<std::string> covered_unfuzzable;

    double avg_visits_per_api() const {
        return apis_covered == 0
                   ? 0.0
                   : static_cast<double>(total_call_occurrences) / static_cast<double>(apis_covered);
    }
};

CoverageStats coverage_report(const SequenceSet& selected, const DependencyGraph& graph);

/// Function ids covered by `candidates` but not by any primitive-input
/// candidate; feeds CoverageStats::covered_unfuzzable.
std::vector<std::string> covered_unfuzzable_apis(const SequenceSet& candidates,
                                                 const DependencyGraph& graph);

/// One line per sequence ("target_k: id1 -> id2 -> ...") followed by a
/// coverage summary block. Byte-deterministic.
std::string dump_sequences(const SequenceSet& selected, const DependencyGraph& graph,
                           const CoverageStats& stats);

std::string format_ratio(double value);  // fixed two decimals

}  // namespace ftg
