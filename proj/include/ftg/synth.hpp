#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ftg/config.hpp"
#include "ftg/dep_graph.hpp"

namespace ftg {

/// How one argument of a planned call is produced: either adapted from an
/// earlier statement's variable through a call chain, or decoded from the
/// fuzzer byte buffer.
struct ArgBinding {
    enum class Kind { Variable, Primitive };
    Kind kind = Kind::Primitive;

    // Kind::Variable
    std::size_t stmt_index = 0;  // defining statement of the bound variable
    CallChain chain;
    bool moves = false;

    // Kind::Primitive
    std::size_t slot_id = 0;
    PrimitiveKind prim_kind = PrimitiveKind::Bool;
    bool prim_dynamic = false;
};

struct UnwrapStep {
    std::size_t stmt_index = 0;
    std::size_t param_index = 0;
    CallStep kind = CallStep::UnwrapOption;  // UnwrapOption or UnwrapResult
};

struct Statement {
    ApiNodeId call = 0;
    std::vector<ArgBinding> args;  // one per parameter, in slot order
    bool has_result = false;
    std::string result_name;
    bool needs_mut = false;     // some later binding takes &mut / *mut of it
    bool result_used = false;   // referenced by any later binding
};

struct ProgramPlan {
    std::vector<Statement> statements;
    std::vector<UnwrapStep> unwrap_steps;  // early exits implied by chains
};

struct FixedSlot {
    std::size_t slot_id = 0;
    PrimitiveKind kind = PrimitiveKind::Bool;
    std::size_t offset = 0;
    std::size_t width = 0;
};

struct DynamicSlot {
    std::size_t slot_id = 0;
    PrimitiveKind kind = PrimitiveKind::Str;
};

/// Byte-buffer map: fixed-width slots first, packed from offset zero in
/// statement-then-slot order; dynamic slots split whatever remains.
struct InputLayout {
    std::vector<FixedSlot> fixed_slots;
    std::vector<DynamicSlot> dynamic_slots;
    std::size_t min_buffer_len = 0;  // fixed widths + one byte per dynamic slot
};

/// Resolves a valid sequence into statements: binds every non-primitive slot
/// to the most recent compatible prior variable, marks moves per the copy
/// whitelist, assigns buffer slots to primitives, and sets mut flags.
/// Throws InternalBindingError if the sequence cannot be bound.
ProgramPlan plan_program(const ApiSequence& seq, const DependencyGraph& graph,
                         const GenerationConfig& config);

InputLayout plan_input_layout(const ProgramPlan& plan, const DependencyGraph& graph);

/// Byte shares for `dynamic_count` slots over `remaining` bytes: slot i gets
/// floor(remaining/count), the first (remaining mod count) slots one extra.
std::vector<std::size_t> split_remainder(std::size_t remaining, std::size_t dynamic_count);

struct PlanViolation {
    std::size_t stmt_index = 0;
    std::size_t param_index = 0;
    std::string message;
};

/// Static checks over a plan; both return an empty list for every plan the
/// planner emits.
std::vector<PlanViolation> check_use_after_move(const ProgramPlan& plan);
std::vector<PlanViolation> check_reference_exclusivity(const ProgramPlan& plan);

struct RenderOptions {
    std::string library_name;
    bool emit_main = true;  // stdin-driven entry for out-of-process fuzzing
};

/// Pluggable source emitter; one reference implementation (Rust) ships
/// in-tree. Primitive kinds it cannot decode raise UnsupportedPrimitiveError
/// from render_target.
class TargetRenderer {
public:
    virtual ~TargetRenderer() = default;
    virtual std::string file_extension() const = 0;
    virtual bool supports_kind(PrimitiveKind kind) const = 0;
    virtual std::string render(const ProgramPlan& plan, const InputLayout& layout,
                               const DependencyGraph& graph,
                               const RenderOptions& options) const = 0;
};

class RustRenderer final : public TargetRenderer {
public:
    std::string file_extension() const override { return "rs"; }
    bool supports_kind(PrimitiveKind kind) const override;
    std::string render(const ProgramPlan& plan, const InputLayout& layout,
                       const DependencyGraph& graph, const RenderOptions& options) const override;
};

/// Renders with the given renderer after checking every slot kind is
/// decodable; defaults to the in-tree Rust renderer.
std::string render_target(const ProgramPlan& plan, const InputLayout& layout,
                          const DependencyGraph& graph, const RenderOptions& options,
                          const TargetRenderer* renderer = nullptr);

}  // namespace ftg
