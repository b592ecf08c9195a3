#include "ftg/synth.hpp"

#include <algorithm>
#include <cassert>

#include "ftg/errors.hpp"

namespace ftg {

ProgramPlan plan_program(const ApiSequence& seq, const DependencyGraph& graph,
                         const GenerationConfig& config) {
    (void)config;  // binding rules were fixed when the graph was built
    ProgramPlan plan;
    BindingState state;
    std::size_t next_slot_id = 0;

    for (std::size_t i = 0; i < seq.calls.size(); ++i) {
        ApiNodeId api = seq.calls[i];
        const ApiFunction& fn = graph.api_nodes[api].function;

        auto bindings = state.try_bind(graph, api);
        if (!bindings)
            throw InternalBindingError("plan_program: sequence declared valid but call " +
                                       fn.id + " at position " + std::to_string(i) +
                                       " cannot be bound");

        Statement stmt;
        stmt.call = api;
        stmt.args.resize(fn.params.size());
        stmt.has_result = fn.ret.has_value();
        stmt.result_name = "v" + std::to_string(i);

        std::vector<bool> is_bound(fn.params.size(), false);
        for (const SlotBinding& b : *bindings) {
            const ValueRecord& v = state.values[b.value_index];
            ArgBinding arg;
            arg.kind = ArgBinding::Kind::Variable;
            arg.stmt_index = v.origin_stmt;
            arg.chain = b.chain;
            arg.moves = b.moves;
            stmt.args[b.slot_index] = arg;
            is_bound[b.slot_index] = true;

            plan.statements[v.origin_stmt].result_used = true;
            if (!b.chain.steps.empty() && (b.chain.steps.front() == CallStep::MutBorrowedRef ||
                                           b.chain.steps.front() == CallStep::MutRawPtr)) {
                plan.statements[v.origin_stmt].needs_mut = true;
            }
            for (std::size_t si = 0; si < b.chain.steps.size(); ++si) {
                CallStep s = b.chain.steps[si];
                if (s == CallStep::UnwrapOption || s == CallStep::UnwrapResult)
                    plan.unwrap_steps.push_back(UnwrapStep{i, b.slot_index, s});
            }
        }

        for (std::size_t pi = 0; pi < fn.params.size(); ++pi) {
            if (is_bound[pi]) continue;
            const TypeExpr& p = fn.params[pi];
            TypeClass c = classify_type(p);
            if (!is_fuzzer_suppliable(c))
                throw InternalBindingError("plan_program: slot " + std::to_string(pi) + " of " +
                                           fn.id + " is neither bound nor fuzzer-suppliable");
            const TypeExpr& prim =
                p.kind() == TypeExpr::Kind::SharedRef ? p.inner() : p;  // &str, &[u8]
            ArgBinding arg;
            arg.kind = ArgBinding::Kind::Primitive;
            arg.slot_id = next_slot_id++;
            arg.prim_kind = prim.primitive_kind();
            arg.prim_dynamic = primitive_is_dynamic(arg.prim_kind);
            stmt.args[pi] = arg;
        }

        state.commit(graph, api, *bindings, i);
        plan.statements.push_back(std::move(stmt));
    }
    return plan;
}

std::vector<std::size_t> split_remainder(std::size_t remaining, std::size_t dynamic_count) {
    std::vector<std::size_t> shares(dynamic_count, 0);
    if (dynamic_count == 0) return shares;
    std::size_t each = remaining / dynamic_count;
    std::size_t extra = remaining % dynamic_count;
    for (std::size_t i = 0; i < dynamic_count; ++i) shares[i] = each + (i < extra ? 1 : 0);
    return shares;
}

InputLayout plan_input_layout(const ProgramPlan& plan, const DependencyGraph& graph) {
    (void)graph;
    InputLayout layout;
    std::size_t offset = 0;
    for (const Statement& stmt : plan.statements) {
        for (const ArgBinding& arg : stmt.args) {
            if (arg.kind != ArgBinding::Kind::Primitive) continue;
            if (arg.prim_dynamic) {
                layout.dynamic_slots.push_back(DynamicSlot{arg.slot_id, arg.prim_kind});
            } else {
                std::size_t width = primitive_width_bytes(arg.prim_kind);
                layout.fixed_slots.push_back(FixedSlot{arg.slot_id, arg.prim_kind, offset, width});
                offset += width;
            }
        }
    }
    layout.min_buffer_len = offset + layout.dynamic_slots.size();
    return layout;
}

std::vector<PlanViolation> check_use_after_move(const ProgramPlan& plan) {
    std::vector<PlanViolation> violations;
    std::vector<bool> moved(plan.statements.size(), false);
    for (std::size_t i = 0; i < plan.statements.size(); ++i) {
        const Statement& stmt = plan.statements[i];
        for (std::size_t pi = 0; pi < stmt.args.size(); ++pi) {
            const ArgBinding& arg = stmt.args[pi];
            if (arg.kind != ArgBinding::Kind::Variable) continue;
            if (arg.stmt_index >= i) {
                violations.push_back({i, pi, "binding references statement " +
                                                 std::to_string(arg.stmt_index) +
                                                 " at or after its own index"});
                continue;
            }
            if (moved[arg.stmt_index]) {
                violations.push_back({i, pi, "use of variable moved earlier: v" +
                                                 std::to_string(arg.stmt_index)});
            }
        }
        for (const ArgBinding& arg : stmt.args) {
            if (arg.kind == ArgBinding::Kind::Variable && arg.moves) moved[arg.stmt_index] = true;
        }
    }
    return violations;
}

std::vector<PlanViolation> check_reference_exclusivity(const ProgramPlan& plan) {
    std::vector<PlanViolation> violations;
    for (std::size_t i = 0; i < plan.statements.size(); ++i) {
        const Statement& stmt = plan.statements[i];
        // References are call-site temporaries, so exclusivity is decided
        // within one statement: a variable taken by &mut/*mut must not be
        // bound a second time in that statement.
        for (std::size_t a = 0; a < stmt.args.size(); ++a) {
            const ArgBinding& lhs = stmt.args[a];
            if (lhs.kind != ArgBinding::Kind::Variable || lhs.chain.steps.empty()) continue;
            bool exclusive = lhs.chain.steps.front() == CallStep::MutBorrowedRef ||
                             lhs.chain.steps.front() == CallStep::MutRawPtr;
            if (!exclusive) continue;
            for (std::size_t b = 0; b < stmt.args.size(); ++b) {
                if (b == a) continue;
                const ArgBinding& rhs = stmt.args[b];
                if (rhs.kind == ArgBinding::Kind::Variable && rhs.stmt_index == lhs.stmt_index) {
                    violations.push_back({i, b, "variable v" + std::to_string(lhs.stmt_index) +
                                                    " bound alongside an exclusive borrow"});
                }
            }
        }
    }
    return violations;
}

std::string render_target(const ProgramPlan& plan, const InputLayout& layout,
                          const DependencyGraph& graph, const RenderOptions& options,
                          const TargetRenderer* renderer) {
    static const RustRenderer default_renderer;
    const TargetRenderer* r = renderer ? renderer : &default_renderer;
    for (const FixedSlot& s : layout.fixed_slots) {
        if (!r->supports_kind(s.kind)) throw UnsupportedPrimitiveError(primitive_name(s.kind));
    }
    for (const DynamicSlot& s : layout.dynamic_slots) {
        if (!r->supports_kind(s.kind)) throw UnsupportedPrimitiveError(primitive_name(s.kind));
    }
    return r->render(plan, layout, graph, options);
}

}  // namespace ftg
