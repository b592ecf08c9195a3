#include "ftg/seqgen.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>
#include <unordered_set>

#include "ftg/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftg {

namespace {

// A frontier entry: the call list plus its simulated binding state, carried
// along so each level extends incrementally instead of replaying prefixes.
struct WorkItem {
    std::vector<ApiNodeId> calls;
    BindingState state;
    std::vector<std::size_t> covered_edges;
    bool has_primitive_input = false;
    bool has_dynamic_primitive_input = false;
};

bool node_can_ever_run(const DependencyGraph& graph, ApiNodeId api) {
    const ApiNode& node = graph.api_nodes[api];
    if (node.has_unsupported_slot) return false;
    for (const TypeExpr& p : node.function.params) {
        if (classify_type(p) == TypeClass::NonPrimitive && !base_nominal_path(p)) return false;
    }
    return true;
}

WorkItem extend_item(const DependencyGraph& graph, const WorkItem& item, ApiNodeId api,
                     const std::vector<SlotBinding>& bindings) {
    WorkItem next = item;
    std::size_t stmt = next.calls.size();
    for (const SlotBinding& b : bindings) {
        const ValueRecord& v = next.state.values[b.value_index];
        if (auto ei = graph.producer_edge_index(v.producer, b.param))
            next.covered_edges.push_back(*ei);
    }
    next.state.commit(graph, api, bindings, stmt);
    next.calls.push_back(api);
    for (const TypeExpr& p : graph.api_nodes[api].function.params) {
        TypeClass c = classify_type(p);
        if (c == TypeClass::PrimitiveFixed) next.has_primitive_input = true;
        if (c == TypeClass::PrimitiveDynamic) {
            next.has_primitive_input = true;
            next.has_dynamic_primitive_input = true;
        }
    }
    return next;
}

std::vector<WorkItem> extend_one(const DependencyGraph& graph,
                                 const std::vector<ApiNodeId>& runnable, const WorkItem& item) {
    std::vector<WorkItem> out;
    for (ApiNodeId api : runnable) {
        auto bindings = item.state.try_bind(graph, api);
        if (!bindings) continue;
        out.push_back(extend_item(graph, item, api, *bindings));
    }
    return out;
}

std::vector<WorkItem> expand_level_serial(const DependencyGraph& graph,
                                          const std::vector<ApiNodeId>& runnable,
                                          const std::vector<WorkItem>& frontier) {
    std::vector<WorkItem> next;
    for (const WorkItem& item : frontier) {
        std::vector<WorkItem> ext = extend_one(graph, runnable, item);
        next.insert(next.end(), std::make_move_iterator(ext.begin()),
                    std::make_move_iterator(ext.end()));
    }
    return next;
}

// Extensions of distinct frontier items are independent; compute them across
// threads and merge in frontier order so the level output matches the serial
// path byte for byte.
std::vector<WorkItem> expand_level_parallel(const DependencyGraph& graph,
                                            const std::vector<ApiNodeId>& runnable,
                                            const std::vector<WorkItem>& frontier) {
#ifdef _OPENMP
    std::vector<std::vector<WorkItem>> per_item(frontier.size());
    const long n = static_cast<long>(frontier.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) {
        per_item[static_cast<std::size_t>(i)] =
            extend_one(graph, runnable, frontier[static_cast<std::size_t>(i)]);
    }
    std::vector<WorkItem> next;
    for (auto& chunk : per_item) {
        next.insert(next.end(), std::make_move_iterator(chunk.begin()),
                    std::make_move_iterator(chunk.end()));
    }
    return next;
#else
    return expand_level_serial(graph, runnable, frontier);
#endif
}

ApiSequence finish_item(WorkItem&& item) {
    ApiSequence seq;
    seq.calls = std::move(item.calls);
    std::sort(item.covered_edges.begin(), item.covered_edges.end());
    item.covered_edges.erase(std::unique(item.covered_edges.begin(), item.covered_edges.end()),
                             item.covered_edges.end());
    seq.covered_edges = std::move(item.covered_edges);
    seq.has_primitive_input = item.has_primitive_input;
    seq.has_dynamic_primitive_input = item.has_dynamic_primitive_input;
    return seq;
}

std::vector<std::string> id_vector(const DependencyGraph& graph,
                                   const std::vector<ApiNodeId>& calls) {
    std::vector<std::string> ids;
    ids.reserve(calls.size());
    for (ApiNodeId a : calls) ids.push_back(graph.api_nodes[a].function.id);
    return ids;
}

void sort_sequences(const DependencyGraph& graph, SequenceSet& set) {
    std::stable_sort(set.begin(), set.end(), [&](const ApiSequence& a, const ApiSequence& b) {
        if (a.calls.size() != b.calls.size()) return a.calls.size() < b.calls.size();
        return id_vector(graph, a.calls) < id_vector(graph, b.calls);
    });
}

}  // namespace

bool end_node_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq) {
    if (seq.empty()) return false;
    return graph.api_nodes[seq.back()].is_end;
}

bool redundancy_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq) {
    if (seq.size() < 2) return false;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const ApiNode& node = graph.api_nodes[seq[i]];
        // Param nodes this call can feed: anything it produces plus anything
        // it mutates in place.
        std::vector<ParamNodeId> feeds = graph.produced_params(seq[i]);
        for (std::size_t mi : node.mutates_param_indices) {
            if (auto base = base_nominal_path(node.function.params[mi])) {
                if (auto pid = graph.param_by_base(*base)) feeds.push_back(*pid);
            }
        }
        bool used_later = false;
        for (ParamNodeId p : feeds) {
            for (ApiNodeId consumer : graph.consumers_of(p)) {
                for (std::size_t j = i + 1; j < seq.size() && !used_later; ++j) {
                    if (seq[j] == consumer) used_later = true;
                }
                if (used_later) break;
            }
            if (used_later) break;
        }
        if (!used_later) return true;  // dead node
    }
    return false;
}

SequenceSet bfs_with_pruning(const DependencyGraph& graph, const GenerationConfig& config,
                             ExecutionMode mode) {
    std::vector<ApiNodeId> runnable;
    for (ApiNodeId i = 0; i < graph.api_nodes.size(); ++i) {
        if (node_can_ever_run(graph, i)) runnable.push_back(i);
    }

    std::vector<WorkItem> frontier{WorkItem{}};
    std::vector<WorkItem> generated;
    for (int level = 1; level <= config.max_len; ++level) {
        std::vector<WorkItem> next = mode == ExecutionMode::Parallel
                                         ? expand_level_parallel(graph, runnable, frontier)
                                         : expand_level_serial(graph, runnable, frontier);
        if (next.size() > config.frontier_cap)
            throw FrontierExplosionError(static_cast<std::size_t>(level), next.size(),
                                         config.frontier_cap);
        frontier.clear();
        for (WorkItem& item : next) {
            if (level < config.max_len && !end_node_test(graph, item.calls))
                frontier.push_back(item);
            generated.push_back(std::move(item));
        }
        if (frontier.empty()) break;
    }

    SequenceSet out;
    for (WorkItem& item : generated) {
        if (redundancy_test(graph, item.calls)) continue;
        out.push_back(finish_item(std::move(item)));
    }
    sort_sequences(graph, out);
    return out;
}

SequenceSet backward_search(const DependencyGraph& graph, const SequenceSet& covered,
                            const GenerationConfig& config) {
    (void)config;
    // Pool ordered shortest-first, ties by function ids; dependency choice
    // scans it front to back.
    SequenceSet pool = covered;
    sort_sequences(graph, pool);

    std::unordered_set<ApiNodeId> covered_apis;
    for (const ApiSequence& s : pool)
        for (ApiNodeId a : s.calls) covered_apis.insert(a);

    SequenceSet result;
    bool progress = true;
    while (progress) {
        progress = false;
        for (ApiNodeId api = 0; api < graph.api_nodes.size(); ++api) {
            if (covered_apis.count(api) || !node_can_ever_run(graph, api)) continue;

            std::vector<const ApiSequence*> deps;
            bool satisfiable = true;
            for (const ConsumerEdge* edge : graph.demands_of(api)) {
                for (const ConsumerSlot& slot : edge->slots) {
                    const ApiSequence* chosen = nullptr;
                    for (const ApiSequence& cand : pool) {
                        const ApiFunction& last = graph.api_nodes[cand.calls.back()].function;
                        if (!last.ret) continue;
                        if (graph.chain_between(*last.ret, slot.type)) {
                            chosen = &cand;
                            break;
                        }
                    }
                    if (!chosen) {
                        satisfiable = false;
                        break;
                    }
                    deps.push_back(chosen);
                }
                if (!satisfiable) break;
            }
            if (!satisfiable) continue;

            std::vector<ApiNodeId> calls;
            for (const ApiSequence* d : deps)
                calls.insert(calls.end(), d->calls.begin(), d->calls.end());
            calls.push_back(api);
            // Concatenated providers can in principle steal each other's
            // values through moves; only emit what actually validates.
            if (!validate_sequence(graph, calls)) continue;

            ApiSequence seq = annotate_sequence(graph, std::move(calls));
            for (ApiNodeId a : seq.calls) covered_apis.insert(a);
            pool.push_back(seq);
            sort_sequences(graph, pool);
            result.push_back(std::move(seq));
            progress = true;
        }
    }
    return result;
}

SequenceSet refine(const SequenceSet& candidates, const DependencyGraph& graph,
                   const GenerationConfig& config) {
    std::vector<const ApiSequence*> pool;
    for (const ApiSequence& c : candidates) {
        if (c.has_primitive_input) pool.push_back(&c);  // fuzzing needs fuzzer-fed input
    }

    std::vector<bool> api_covered(graph.api_nodes.size(), false);
    std::vector<bool> edge_covered(graph.producer_edges.size(), false);
    std::vector<bool> taken(pool.size(), false);
    std::mt19937_64 rng(config.rng_seed);

    SequenceSet selected;
    while (true) {
        long best_apis = 0, best_edges = 0;
        std::size_t best_len = 0;
        bool best_dyn = false;
        std::vector<std::size_t> tied;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (taken[i]) continue;
            const ApiSequence& c = *pool[i];
            std::unordered_set<ApiNodeId> apis(c.calls.begin(), c.calls.end());
            long new_apis = 0;
            for (ApiNodeId a : apis)
                if (!api_covered[a]) ++new_apis;
            long new_edges = 0;
            for (std::size_t e : c.covered_edges)
                if (!edge_covered[e]) ++new_edges;
            if (new_apis == 0 && new_edges == 0) continue;

            int cmp = 0;
            if (tied.empty()) {
                cmp = 1;
            } else if (new_apis != best_apis) {
                cmp = new_apis > best_apis ? 1 : -1;
            } else if (new_edges != best_edges) {
                cmp = new_edges > best_edges ? 1 : -1;
            } else if (c.calls.size() != best_len) {
                cmp = c.calls.size() < best_len ? 1 : -1;
            } else if (c.has_dynamic_primitive_input != best_dyn) {
                cmp = c.has_dynamic_primitive_input ? 1 : -1;
            }
            if (cmp > 0) {
                best_apis = new_apis;
                best_edges = new_edges;
                best_len = c.calls.size();
                best_dyn = c.has_dynamic_primitive_input;
                tied.assign(1, i);
            } else if (cmp == 0) {
                tied.push_back(i);
            }
        }
        if (tied.empty()) break;
        std::size_t pick = tied.size() == 1
                               ? tied[0]
                               : tied[rng() % tied.size()];
        taken[pick] = true;
        const ApiSequence& chosen = *pool[pick];
        for (ApiNodeId a : chosen.calls) api_covered[a] = true;
        for (std::size_t e : chosen.covered_edges) edge_covered[e] = true;
        selected.push_back(chosen);
    }
    return selected;
}

CoverageStats coverage_report(const SequenceSet& selected, const DependencyGraph& graph) {
    CoverageStats stats;
    stats.apis_total = graph.api_nodes.size();
    stats.producer_edges_total = graph.producer_edges.size();
    stats.targets = selected.size();

    std::vector<bool> api_covered(graph.api_nodes.size(), false);
    std::vector<bool> edge_covered(graph.producer_edges.size(), false);
    for (const ApiSequence& s : selected) {
        stats.total_call_occurrences += s.calls.size();
        for (ApiNodeId a : s.calls) api_covered[a] = true;
        for (std::size_t e : s.covered_edges) edge_covered[e] = true;
    }
    stats.apis_covered = static_cast<std::size_t>(
        std::count(api_covered.begin(), api_covered.end(), true));
    stats.producer_edges_covered = static_cast<std::size_t>(
        std::count(edge_covered.begin(), edge_covered.end(), true));
    return stats;
}

std::vector<std::string> covered_unfuzzable_apis(const SequenceSet& candidates,
                                                 const DependencyGraph& graph) {
    std::vector<bool> any(graph.api_nodes.size(), false);
    std::vector<bool> fuzzable(graph.api_nodes.size(), false);
    for (const ApiSequence& c : candidates) {
        for (ApiNodeId a : c.calls) {
            any[a] = true;
            if (c.has_primitive_input) fuzzable[a] = true;
        }
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < any.size(); ++i) {
        if (any[i] && !fuzzable[i]) out.push_back(graph.api_nodes[i].function.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_ratio(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string dump_sequences(const SequenceSet& selected, const DependencyGraph& graph,
                           const CoverageStats& stats) {
    std::ostringstream out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        out << "target_" << i << ":";
        const auto& calls = selected[i].calls;
        for (std::size_t j = 0; j < calls.size(); ++j) {
            out << (j == 0 ? " " : " -> ") << graph.api_nodes[calls[j]].function.id;
        }
        out << "\n";
    }
    out << "# coverage\n";
    out << "apis: " << stats.apis_covered << "/" << stats.apis_total << "\n";
    out << "producer_edges: " << stats.producer_edges_covered << "/"
        << stats.producer_edges_total << "\n";
    out << "targets: " << stats.targets << "\n";
    out << "avg_visits_per_api: " << format_ratio(stats.avg_visits_per_api()) << "\n";
    if (!stats.covered_unfuzzable.empty()) {
        out << "covered_unfuzzable:";
        for (const std::string& id : stats.covered_unfuzzable) out << " " << id;
        out << "\n";
    }
    return out.str();
}

}  // namespace ftg
