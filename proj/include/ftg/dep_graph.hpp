#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftg/api_model.hpp"
#include "ftg/config.hpp"

namespace ftg {

// Indices into DependencyGraph::api_nodes / param_nodes.
using ApiNodeId = std::uint32_t;
using ParamNodeId = std::uint32_t;

struct ApiNode {
    ApiFunction function;
    bool is_start = false;  // no slot classifies as non-primitive
    bool is_end = false;    // no non-primitive return, no non-primitive &mut slot
    bool has_unsupported_slot = false;             // never reachable, kept for coverage
    std::vector<std::size_t> mutates_param_indices;  // &mut slots over non-primitives
};

struct ParamNode {
    std::string base_path;                 // nominal path with wrapper layers stripped
    std::vector<TypeExpr> concrete_forms;  // distinct slot types, first-seen order
};

struct ProducerEdge {
    ApiNodeId api;
    ParamNodeId param;
    CallChain chain;  // canonical: shortest over all concrete forms, ties by row order
};

struct ConsumerSlot {
    std::size_t param_index;
    TypeExpr type;
};

struct ConsumerEdge {
    ParamNodeId param;
    ApiNodeId api;
    std::uint32_t weight = 0;  // number of this function's slots with this base
    std::vector<ConsumerSlot> slots;
};

/// Bipartite graph over API nodes and parameter-type nodes; immutable after
/// build_graph, queries are pure.
struct DependencyGraph {
    std::vector<ApiNode> api_nodes;      // one per function, spec order
    std::vector<ParamNode> param_nodes;  // first-seen order
    std::vector<ProducerEdge> producer_edges;
    std::vector<ConsumerEdge> consumer_edges;
    ChainSearchRules chain_rules;

    std::optional<ApiNodeId> api_by_id(const std::string& function_id) const;
    std::optional<ParamNodeId> param_by_base(const std::string& base_path) const;

    const std::vector<ParamNodeId>& produced_params(ApiNodeId api) const;
    const std::vector<ApiNodeId>& consumers_of(ParamNodeId param) const;
    /// Demands of one function, one entry per param node it consumes.
    const std::vector<const ConsumerEdge*>& demands_of(ApiNodeId api) const;
    std::optional<std::size_t> producer_edge_index(ApiNodeId api, ParamNodeId param) const;

    /// Chain between a return type and a consumer slot form, memoized over
    /// the finite set of types the graph can ever pair up. Safe to read
    /// concurrently; falls back to a fresh search for types outside that set.
    std::optional<CallChain> chain_between(const TypeExpr& producer_ret,
                                           const TypeExpr& slot_form) const;

    // Built once at the end of build_graph.
    struct Index {
        std::vector<std::vector<ParamNodeId>> produced;
        std::vector<std::vector<ApiNodeId>> consumers;
        std::vector<std::vector<const ConsumerEdge*>> demands;
        std::map<std::pair<std::string, std::string>, std::optional<CallChain>> chain_table;
    };
    Index index;
};

DependencyGraph build_graph(const ApiSpec& spec, const GenerationConfig& config);

/// A generated call sequence plus the coverage it earns under the
/// deterministic binding policy.
struct ApiSequence {
    std::vector<ApiNodeId> calls;
    std::vector<std::size_t> covered_edges;  // producer edge indices, sorted unique
    bool has_primitive_input = false;
    bool has_dynamic_primitive_input = false;
};

/// True iff `candidate` can be appended to `prefix`: it is a supported start
/// node, or every non-primitive slot binds to a distinct unconsumed value
/// the prefix makes available. Any unsupported slot fails the test outright.
bool reachability_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& prefix,
                       ApiNodeId candidate);

/// True iff seq is non-empty, starts at a start node, and every later call
/// passes reachability_test against its prefix.
bool validate_sequence(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq);

/// Builds an ApiSequence for a known-valid call list: simulates the binding
/// policy to collect covered producer edges and primitive-input flags.
ApiSequence annotate_sequence(const DependencyGraph& graph, std::vector<ApiNodeId> calls);

/// Graphviz dot text; node and edge order is fixed (function id, then base
/// path) so output is byte-deterministic.
std::string export_dot(const DependencyGraph& graph);

// ---------------------------------------------------------------------------
// Binding simulation, shared by reachability, sequence generation and
// program planning so that all three agree on availability and moves.
// ---------------------------------------------------------------------------

/// One value produced (and possibly mutated) while simulating a sequence.
struct ValueRecord {
    std::size_t origin_stmt = 0;     // statement that created the value
    ApiNodeId producer = 0;          // function that created it
    TypeExpr type;                   // the producer's return type
    std::string base_path;           // nominal base of `type`
    std::size_t last_touch = 0;      // creation or latest mutation statement
    bool consumed = false;           // a moving binding used it up
};

struct SlotBinding {
    std::size_t slot_index = 0;   // parameter position in the consumer
    std::size_t value_index = 0;  // into BindingState::values
    ParamNodeId param = 0;        // node the slot demands
    CallChain chain;
    bool moves = false;
    bool mutates = false;
};

/// True when binding a value of type `value_type` through `chain` transfers
/// ownership. Reference- and pointer-taking first steps borrow; a direct
/// call of a shared reference or a fixed-width primitive copies; everything
/// else moves.
bool chain_moves_value(const TypeExpr& value_type, const CallChain& chain);

struct BindingState {
    std::vector<ValueRecord> values;

    /// Binds every non-primitive slot of `api` against the current values:
    /// most-recent-first with backtracking, so a binding is found whenever
    /// one exists. Does not mutate state. Empty result = satisfiable with no
    /// demands; nullopt = unsatisfiable.
    std::optional<std::vector<SlotBinding>> try_bind(const DependencyGraph& graph,
                                                     ApiNodeId api) const;

    /// Applies bindings (consume moved values, bump mutation recency) and
    /// records the new statement's return value, if any.
    void commit(const DependencyGraph& graph, ApiNodeId api,
                const std::vector<SlotBinding>& bindings, std::size_t stmt_index);
};

}  // namespace ftg
