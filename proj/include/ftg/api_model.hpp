#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ftg {

// Fixed-width kinds decode from a constant number of buffer bytes; dynamic
// kinds (str, bytes) take a share of whatever buffer remains.
enum class PrimitiveKind {
    Bool,
    U8,
    U16,
    U32,
    U64,
    Usize,
    I8,
    I16,
    I32,
    I64,
    Isize,
    F32,
    F64,
    Char,
    Str,    // utf8 string, dynamic length
    Bytes,  // raw byte sequence, dynamic length
};

bool primitive_is_dynamic(PrimitiveKind k);
std::size_t primitive_width_bytes(PrimitiveKind k);  // fixed kinds only
const char* primitive_name(PrimitiveKind k);
std::optional<PrimitiveKind> primitive_from_name(const std::string& name);

enum class UnsupportedTag {
    Generic,
    TraitObject,
    Closure,
    Async,
    StaticString,
    FixedArray,
    Other,
};

const char* unsupported_tag_name(UnsupportedTag t);

/// A type in the subject language's surface grammar. Construction is acyclic
/// and instances are immutable values; any type containing an unsupported
/// part normalizes to a single top-level Unsupported node.
class TypeExpr {
public:
    enum class Kind {
        Primitive,
        Nominal,
        SharedRef,
        ExclusiveRef,
        ConstRawPointer,
        MutRawPointer,
        OptionOf,
        ResultOf,
        Unsupported,
    };

    static TypeExpr primitive(PrimitiveKind k);
    static TypeExpr nominal(std::string path);
    static TypeExpr shared_ref(TypeExpr inner);
    static TypeExpr exclusive_ref(TypeExpr inner);
    static TypeExpr const_raw_pointer(TypeExpr inner);
    static TypeExpr mut_raw_pointer(TypeExpr inner);
    static TypeExpr option_of(TypeExpr inner);
    static TypeExpr result_of(TypeExpr ok, TypeExpr err);
    static TypeExpr unsupported(UnsupportedTag tag, std::string raw);

    Kind kind() const { return kind_; }
    PrimitiveKind primitive_kind() const { return prim_; }
    const std::string& nominal_path() const { return text_; }
    UnsupportedTag unsupported_tag() const { return tag_; }
    const std::string& unsupported_raw() const { return text_; }

    const TypeExpr& inner() const { return children_[0]; }  // single-child kinds
    const TypeExpr& ok_type() const { return children_[0]; }
    const TypeExpr& err_type() const { return children_[1]; }

    bool operator==(const TypeExpr& other) const;
    bool operator!=(const TypeExpr& other) const { return !(*this == other); }

    /// Canonical source-like rendering, e.g. "&mut toylib::S2", "Option<u8>".
    std::string to_string() const;

private:
    TypeExpr() = default;

    Kind kind_ = Kind::Nominal;
    PrimitiveKind prim_ = PrimitiveKind::Bool;
    UnsupportedTag tag_ = UnsupportedTag::Other;
    std::string text_;
    std::vector<TypeExpr> children_;
};

enum class TypeClass {
    PrimitiveFixed,
    PrimitiveDynamic,
    NonPrimitive,
    Unsupported,
};

TypeClass classify_type(const TypeExpr& t);
bool is_fuzzer_suppliable(TypeClass c);

/// Lifts any nested Unsupported to the top: a container of an unsupported
/// type is wholly unsupported. Idempotent.
TypeExpr normalize(const TypeExpr& t);

/// Nominal path after stripping reference, pointer, Option and Result (ok
/// side) layers; empty when the stripped core is not a nominal.
std::optional<std::string> base_nominal_path(const TypeExpr& t);

// Table of adaptation steps between a producer type and a consumer type.
// Enum order is the table's row order and breaks ties in chain search.
enum class CallStep {
    DirectCall,
    BorrowedRef,
    MutBorrowedRef,
    ConstRawPtr,
    MutRawPtr,
    DerefBorrowedRef,
    DerefRawPtr,
    UnwrapResult,
    UnwrapOption,
    ToOption,
};

inline constexpr int kCallStepCount = 10;
const char* call_step_name(CallStep s);

struct CallChain {
    std::vector<CallStep> steps;

    bool operator==(const CallChain&) const = default;
    std::string to_string() const;  // "unwrap_option > ref"
};

struct ChainSearchRules {
    int max_depth = 2;
    bool allow_pointer_deref = false;
};

/// Applies one step symbolically. Absent when the step does not fit the
/// current type shape (e.g. unwrapping a non-Option).
std::optional<TypeExpr> apply_step(CallStep step, const TypeExpr& t);

/// Replays a whole chain on `producer`; absent if any step fails to apply.
std::optional<TypeExpr> apply_chain(const CallChain& chain, const TypeExpr& producer);

/// Shortest chain of length <= rules.max_depth turning `producer` into
/// `consumer`; ties on length break by table row order of the first
/// differing step. [DirectCall] is the identity chain. Absent when no chain
/// exists or either type is unsupported. ToOption is only tried when the
/// consumer's outermost constructor is Option; pointer dereference steps are
/// only tried when rules.allow_pointer_deref is set.
std::optional<CallChain> infer_call_chain(const TypeExpr& producer, const TypeExpr& consumer,
                                          const ChainSearchRules& rules);

struct ApiFunction {
    std::string id;
    std::string path;
    std::vector<TypeExpr> params;  // receiver, if any, is params[0]
    std::optional<TypeExpr> ret;
    bool is_method = false;
};

struct ApiSpec {
    std::string library_name;
    std::string library_version;
    std::vector<ApiFunction> functions;  // document order, ids unique
};

/// Parses one type string of the API-spec grammar. Unparsable input yields
/// an Unsupported node, never an error. The result is normalized.
TypeExpr parse_type_string(const std::string& text);

/// Parses a UTF-8 API-spec JSON document. Document-level problems throw
/// ParseError (with line/column for syntax errors) or DuplicateIdError;
/// individual type strings that fail to parse become Unsupported(other).
ApiSpec parse_api_spec(const std::string& text);

}  // namespace ftg
