#include "ftg/dep_graph.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>

#include "ftg/errors.hpp"

namespace ftg {

namespace {

bool slot_is_mutating(const TypeExpr& slot) {
    return slot.kind() == TypeExpr::Kind::ExclusiveRef &&
           classify_type(slot.inner()) == TypeClass::NonPrimitive;
}

bool node_has_nonnominal_demand(const ApiFunction& fn) {
    for (const TypeExpr& p : fn.params) {
        if (classify_type(p) == TypeClass::NonPrimitive && !base_nominal_path(p)) return true;
    }
    return false;
}

}  // namespace

std::optional<ApiNodeId> DependencyGraph::api_by_id(const std::string& function_id) const {
    for (std::size_t i = 0; i < api_nodes.size(); ++i) {
        if (api_nodes[i].function.id == function_id) return static_cast<ApiNodeId>(i);
    }
    return std::nullopt;
}

std::optional<ParamNodeId> DependencyGraph::param_by_base(const std::string& base_path) const {
    for (std::size_t i = 0; i < param_nodes.size(); ++i) {
        if (param_nodes[i].base_path == base_path) return static_cast<ParamNodeId>(i);
    }
    return std::nullopt;
}

const std::vector<ParamNodeId>& DependencyGraph::produced_params(ApiNodeId api) const {
    return index.produced[api];
}

const std::vector<ApiNodeId>& DependencyGraph::consumers_of(ParamNodeId param) const {
    return index.consumers[param];
}

const std::vector<const ConsumerEdge*>& DependencyGraph::demands_of(ApiNodeId api) const {
    return index.demands[api];
}

std::optional<std::size_t> DependencyGraph::producer_edge_index(ApiNodeId api,
                                                                ParamNodeId param) const {
    for (std::size_t i = 0; i < producer_edges.size(); ++i) {
        if (producer_edges[i].api == api && producer_edges[i].param == param) return i;
    }
    return std::nullopt;
}

DependencyGraph build_graph(const ApiSpec& spec, const GenerationConfig& config) {
    DependencyGraph g;
    g.chain_rules = ChainSearchRules{config.max_chain_depth, config.allow_pointer_deref};

    // API nodes with start/end classification.
    for (const ApiFunction& fn : spec.functions) {
        ApiNode node;
        node.function = fn;
        bool any_non_primitive = false;
        for (std::size_t i = 0; i < fn.params.size(); ++i) {
            TypeClass c = classify_type(fn.params[i]);
            if (c == TypeClass::NonPrimitive) any_non_primitive = true;
            if (c == TypeClass::Unsupported) node.has_unsupported_slot = true;
            if (slot_is_mutating(fn.params[i])) node.mutates_param_indices.push_back(i);
        }
        node.is_start = !any_non_primitive;
        bool primitive_ret = !fn.ret || is_fuzzer_suppliable(classify_type(*fn.ret));
        node.is_end = primitive_ret && node.mutates_param_indices.empty();
        g.api_nodes.push_back(std::move(node));
    }

    // Parameter nodes and consumer edges. One param node per distinct base
    // nominal; one consumer edge per (param node, function) carrying every
    // slot of that base.
    for (ApiNodeId fi = 0; fi < g.api_nodes.size(); ++fi) {
        const ApiFunction& fn = g.api_nodes[fi].function;
        for (std::size_t si = 0; si < fn.params.size(); ++si) {
            const TypeExpr& slot = fn.params[si];
            if (classify_type(slot) != TypeClass::NonPrimitive) continue;
            auto base = base_nominal_path(slot);
            if (!base) continue;

            ParamNodeId pid;
            if (auto existing = g.param_by_base(*base)) {
                pid = *existing;
            } else {
                pid = static_cast<ParamNodeId>(g.param_nodes.size());
                g.param_nodes.push_back(ParamNode{*base, {}});
            }
            auto& forms = g.param_nodes[pid].concrete_forms;
            if (std::find(forms.begin(), forms.end(), slot) == forms.end())
                forms.push_back(slot);

            ConsumerEdge* edge = nullptr;
            for (ConsumerEdge& e : g.consumer_edges) {
                if (e.api == fi && e.param == pid) {
                    edge = &e;
                    break;
                }
            }
            if (!edge) {
                g.consumer_edges.push_back(ConsumerEdge{pid, fi, 0, {}});
                edge = &g.consumer_edges.back();
            }
            edge->weight += 1;
            edge->slots.push_back(ConsumerSlot{si, slot});
        }
    }

    // Producer edges: one per (function, param node) pair with the shortest
    // chain over all of the node's concrete forms, ties by table row order
    // then first-seen form.
    for (ApiNodeId fi = 0; fi < g.api_nodes.size(); ++fi) {
        const ApiFunction& fn = g.api_nodes[fi].function;
        if (!fn.ret) continue;
        auto ret_base = base_nominal_path(*fn.ret);
        if (!ret_base) continue;
        for (ParamNodeId pi = 0; pi < g.param_nodes.size(); ++pi) {
            if (g.param_nodes[pi].base_path != *ret_base) continue;
            std::optional<CallChain> best;
            for (const TypeExpr& form : g.param_nodes[pi].concrete_forms) {
                auto chain = infer_call_chain(*fn.ret, form, g.chain_rules);
                if (!chain) continue;
                if (!best || chain->steps.size() < best->steps.size() ||
                    (chain->steps.size() == best->steps.size() && chain->steps < best->steps)) {
                    best = std::move(chain);
                }
            }
            if (best) g.producer_edges.push_back(ProducerEdge{fi, pi, std::move(*best)});
        }
    }

    // Adjacency index.
    g.index.produced.resize(g.api_nodes.size());
    g.index.consumers.resize(g.param_nodes.size());
    g.index.demands.resize(g.api_nodes.size());
    for (const ProducerEdge& e : g.producer_edges) g.index.produced[e.api].push_back(e.param);
    for (const ConsumerEdge& e : g.consumer_edges) {
        g.index.consumers[e.param].push_back(e.api);
        g.index.demands[e.api].push_back(&e);
    }

    // Memoize chains between every return type and every consumer form so
    // binding never re-runs the chain search.
    for (const ApiNode& n : g.api_nodes) {
        if (!n.function.ret) continue;
        const TypeExpr& ret = *n.function.ret;
        for (const ParamNode& p : g.param_nodes) {
            for (const TypeExpr& form : p.concrete_forms) {
                auto key = std::make_pair(ret.to_string(), form.to_string());
                if (!g.index.chain_table.count(key))
                    g.index.chain_table.emplace(key, infer_call_chain(ret, form, g.chain_rules));
            }
        }
    }
    return g;
}

std::optional<CallChain> DependencyGraph::chain_between(const TypeExpr& producer_ret,
                                                        const TypeExpr& slot_form) const {
    auto it = index.chain_table.find({producer_ret.to_string(), slot_form.to_string()});
    if (it != index.chain_table.end()) return it->second;
    return infer_call_chain(producer_ret, slot_form, chain_rules);
}

// ---------------------------------------------------------------------------
// Binding simulation
// ---------------------------------------------------------------------------

bool chain_moves_value(const TypeExpr& value_type, const CallChain& chain) {
    if (value_type.kind() == TypeExpr::Kind::Primitive &&
        !primitive_is_dynamic(value_type.primitive_kind())) {
        return false;  // fixed-width primitives copy
    }
    if (chain.steps.empty()) return true;
    switch (chain.steps.front()) {
        case CallStep::BorrowedRef:
        case CallStep::MutBorrowedRef:
        case CallStep::ConstRawPtr:
        case CallStep::MutRawPtr:
            return false;  // reference/pointer-taking borrows the variable
        default:
            break;
    }
    if (chain.steps.size() == 1 && chain.steps.front() == CallStep::DirectCall &&
        value_type.kind() == TypeExpr::Kind::SharedRef) {
        return false;  // shared references copy on direct use
    }
    return true;
}

namespace {

struct DemandSlot {
    std::size_t slot_index;
    const TypeExpr* form;
    const std::string* base;
    ParamNodeId param;
    bool mutates;
};

// Most-recent-first candidate order; deterministic.
std::vector<std::size_t> candidate_values(const std::vector<ValueRecord>& values,
                                          const std::string& base) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].consumed && values[i].base_path == base) out.push_back(i);
    }
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        if (values[a].last_touch != values[b].last_touch)
            return values[a].last_touch > values[b].last_touch;
        return values[a].origin_stmt > values[b].origin_stmt;
    });
    return out;
}

bool assign_slots(const DependencyGraph& graph, const std::vector<ValueRecord>& values,
                  const std::vector<DemandSlot>& slots, std::size_t at,
                  std::vector<bool>& taken, std::vector<SlotBinding>& out) {
    if (at == slots.size()) return true;
    const DemandSlot& slot = slots[at];
    for (std::size_t vi : candidate_values(values, *slot.base)) {
        if (taken[vi]) continue;
        auto chain = graph.chain_between(values[vi].type, *slot.form);
        if (!chain) continue;
        taken[vi] = true;
        out.push_back(SlotBinding{slot.slot_index, vi, slot.param, *chain,
                                  chain_moves_value(values[vi].type, *chain), slot.mutates});
        if (assign_slots(graph, values, slots, at + 1, taken, out)) return true;
        out.pop_back();
        taken[vi] = false;
    }
    return false;
}

}  // namespace

std::optional<std::vector<SlotBinding>> BindingState::try_bind(const DependencyGraph& graph,
                                                               ApiNodeId api) const {
    const ApiNode& node = graph.api_nodes[api];
    std::vector<DemandSlot> slots;
    for (const ConsumerEdge* edge : graph.demands_of(api)) {
        for (const ConsumerSlot& s : edge->slots) {
            bool mutates = std::find(node.mutates_param_indices.begin(),
                                     node.mutates_param_indices.end(),
                                     s.param_index) != node.mutates_param_indices.end();
            slots.push_back(
                DemandSlot{s.param_index, &s.type, &graph.param_nodes[edge->param].base_path,
                           edge->param, mutates});
        }
    }
    std::sort(slots.begin(), slots.end(),
              [](const DemandSlot& a, const DemandSlot& b) { return a.slot_index < b.slot_index; });

    std::vector<SlotBinding> out;
    std::vector<bool> taken(values.size(), false);
    if (!assign_slots(graph, values, slots, 0, taken, out)) return std::nullopt;
    std::sort(out.begin(), out.end(),
              [](const SlotBinding& a, const SlotBinding& b) { return a.slot_index < b.slot_index; });
    return out;
}

void BindingState::commit(const DependencyGraph& graph, ApiNodeId api,
                          const std::vector<SlotBinding>& bindings, std::size_t stmt_index) {
    for (const SlotBinding& b : bindings) {
        if (b.moves) values[b.value_index].consumed = true;
        if (b.mutates) values[b.value_index].last_touch = stmt_index;
    }
    const ApiFunction& fn = graph.api_nodes[api].function;
    if (fn.ret) {
        if (auto base = base_nominal_path(*fn.ret)) {
            values.push_back(ValueRecord{stmt_index, api, *fn.ret, *base, stmt_index, false});
        }
    }
}

// ---------------------------------------------------------------------------
// Reachability and validity
// ---------------------------------------------------------------------------

namespace {

bool node_callable_at_all(const DependencyGraph& graph, ApiNodeId api) {
    const ApiNode& node = graph.api_nodes[api];
    if (node.has_unsupported_slot) return false;
    if (node_has_nonnominal_demand(node.function)) return false;
    return true;
}

}  // namespace

bool reachability_test(const DependencyGraph& graph, const std::vector<ApiNodeId>& prefix,
                       ApiNodeId candidate) {
    if (!node_callable_at_all(graph, candidate)) return false;
    if (graph.api_nodes[candidate].is_start) return true;

    BindingState state;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        auto bindings = state.try_bind(graph, prefix[i]);
        if (!bindings) return false;  // garbage prefix
        state.commit(graph, prefix[i], *bindings, i);
    }
    return state.try_bind(graph, candidate).has_value();
}

bool validate_sequence(const DependencyGraph& graph, const std::vector<ApiNodeId>& seq) {
    if (seq.empty()) return false;
    BindingState state;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!node_callable_at_all(graph, seq[i])) return false;
        auto bindings = state.try_bind(graph, seq[i]);
        if (!bindings) return false;
        state.commit(graph, seq[i], *bindings, i);
    }
    return true;
}

ApiSequence annotate_sequence(const DependencyGraph& graph, std::vector<ApiNodeId> calls) {
    ApiSequence seq;
    BindingState state;
    std::vector<std::size_t> edges;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        auto bindings = state.try_bind(graph, calls[i]);
        if (!bindings)
            throw InternalBindingError("annotate_sequence: unbindable call at position " +
                                       std::to_string(i));
        for (const SlotBinding& b : *bindings) {
            const ValueRecord& v = state.values[b.value_index];
            auto ei = graph.producer_edge_index(v.producer, b.param);
            assert(ei);
            if (ei) edges.push_back(*ei);
        }
        state.commit(graph, calls[i], *bindings, i);

        for (const TypeExpr& p : graph.api_nodes[calls[i]].function.params) {
            TypeClass c = classify_type(p);
            if (c == TypeClass::PrimitiveFixed) seq.has_primitive_input = true;
            if (c == TypeClass::PrimitiveDynamic) {
                seq.has_primitive_input = true;
                seq.has_dynamic_primitive_input = true;
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    seq.covered_edges = std::move(edges);
    seq.calls = std::move(calls);
    return seq;
}

// ---------------------------------------------------------------------------
// Dot export
// ---------------------------------------------------------------------------

std::string export_dot(const DependencyGraph& graph) {
    std::ostringstream out;
    out << "digraph api_deps {\n";
    out << "  rankdir=LR;\n";

    std::vector<ApiNodeId> api_order(graph.api_nodes.size());
    for (std::size_t i = 0; i < api_order.size(); ++i) api_order[i] = static_cast<ApiNodeId>(i);
    std::sort(api_order.begin(), api_order.end(), [&](ApiNodeId a, ApiNodeId b) {
        return graph.api_nodes[a].function.id < graph.api_nodes[b].function.id;
    });
    std::vector<ParamNodeId> param_order(graph.param_nodes.size());
    for (std::size_t i = 0; i < param_order.size(); ++i)
        param_order[i] = static_cast<ParamNodeId>(i);
    std::sort(param_order.begin(), param_order.end(), [&](ParamNodeId a, ParamNodeId b) {
        return graph.param_nodes[a].base_path < graph.param_nodes[b].base_path;
    });

    for (ApiNodeId i : api_order) {
        const ApiNode& n = graph.api_nodes[i];
        out << "  \"api_" << n.function.id << "\" [shape=box label=\"" << n.function.path << "\"";
        if (n.is_start && n.is_end)
            out << " style=\"rounded,bold\"";
        else if (n.is_start)
            out << " style=rounded";
        else if (n.is_end)
            out << " style=bold";
        out << "];\n";
    }
    for (ParamNodeId i : param_order) {
        out << "  \"par_" << graph.param_nodes[i].base_path << "\" [shape=ellipse label=\""
            << graph.param_nodes[i].base_path << "\"];\n";
    }

    std::vector<const ProducerEdge*> producers;
    for (const ProducerEdge& e : graph.producer_edges) producers.push_back(&e);
    std::sort(producers.begin(), producers.end(), [&](const ProducerEdge* a, const ProducerEdge* b) {
        const std::string& fa = graph.api_nodes[a->api].function.id;
        const std::string& fb = graph.api_nodes[b->api].function.id;
        if (fa != fb) return fa < fb;
        return graph.param_nodes[a->param].base_path < graph.param_nodes[b->param].base_path;
    });
    for (const ProducerEdge* e : producers) {
        out << "  \"api_" << graph.api_nodes[e->api].function.id << "\" -> \"par_"
            << graph.param_nodes[e->param].base_path << "\" [label=\"" << e->chain.to_string()
            << "\"];\n";
    }

    std::vector<const ConsumerEdge*> consumers;
    for (const ConsumerEdge& e : graph.consumer_edges) consumers.push_back(&e);
    std::sort(consumers.begin(), consumers.end(), [&](const ConsumerEdge* a, const ConsumerEdge* b) {
        const std::string& pa = graph.param_nodes[a->param].base_path;
        const std::string& pb = graph.param_nodes[b->param].base_path;
        if (pa != pb) return pa < pb;
        return graph.api_nodes[a->api].function.id < graph.api_nodes[b->api].function.id;
    });
    for (const ConsumerEdge* e : consumers) {
        out << "  \"par_" << graph.param_nodes[e->param].base_path << "\" -> \"api_"
            << graph.api_nodes[e->api].function.id << "\" [label=\"w=" << e->weight << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace ftg
