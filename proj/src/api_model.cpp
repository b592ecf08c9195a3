#include "ftg/api_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "ftg/errors.hpp"
#include "json.hpp"

namespace ftg {

namespace {

struct PrimitiveRow {
    PrimitiveKind kind;
    const char* name;
    std::size_t width;  // 0 = dynamic
};

constexpr std::array<PrimitiveRow, 16> kPrimitiveTable{{
    {PrimitiveKind::Bool, "bool", 1},
    {PrimitiveKind::U8, "u8", 1},
    {PrimitiveKind::U16, "u16", 2},
    {PrimitiveKind::U32, "u32", 4},
    {PrimitiveKind::U64, "u64", 8},
    {PrimitiveKind::Usize, "usize", 8},
    {PrimitiveKind::I8, "i8", 1},
    {PrimitiveKind::I16, "i16", 2},
    {PrimitiveKind::I32, "i32", 4},
    {PrimitiveKind::I64, "i64", 8},
    {PrimitiveKind::Isize, "isize", 8},
    {PrimitiveKind::F32, "f32", 4},
    {PrimitiveKind::F64, "f64", 8},
    {PrimitiveKind::Char, "char", 4},
    {PrimitiveKind::Str, "str", 0},
    {PrimitiveKind::Bytes, "bytes", 0},
}};

const PrimitiveRow& primitive_row(PrimitiveKind k) {
    for (const auto& row : kPrimitiveTable) {
        if (row.kind == k) return row;
    }
    return kPrimitiveTable[0];  // unreachable for valid kinds
}

}  // namespace

bool primitive_is_dynamic(PrimitiveKind k) {
    return k == PrimitiveKind::Str || k == PrimitiveKind::Bytes;
}

std::size_t primitive_width_bytes(PrimitiveKind k) { return primitive_row(k).width; }

const char* primitive_name(PrimitiveKind k) { return primitive_row(k).name; }

std::optional<PrimitiveKind> primitive_from_name(const std::string& name) {
    for (const auto& row : kPrimitiveTable) {
        if (name == row.name) return row.kind;
    }
    return std::nullopt;
}

const char* unsupported_tag_name(UnsupportedTag t) {
    switch (t) {
        case UnsupportedTag::Generic: return "generic";
        case UnsupportedTag::TraitObject: return "trait-object";
        case UnsupportedTag::Closure: return "closure";
        case UnsupportedTag::Async: return "async";
        case UnsupportedTag::StaticString: return "static-string";
        case UnsupportedTag::FixedArray: return "fixed-array";
        case UnsupportedTag::Other: return "other";
    }
    return "other";
}

TypeExpr TypeExpr::primitive(PrimitiveKind k) {
    TypeExpr t;
    t.kind_ = Kind::Primitive;
    t.prim_ = k;
    return t;
}

TypeExpr TypeExpr::nominal(std::string path) {
    TypeExpr t;
    t.kind_ = Kind::Nominal;
    t.text_ = std::move(path);
    return t;
}

TypeExpr TypeExpr::shared_ref(TypeExpr inner) {
    TypeExpr t;
    t.kind_ = Kind::SharedRef;
    t.children_.push_back(std::move(inner));
    return t;
}

TypeExpr TypeExpr::exclusive_ref(TypeExpr inner) {
    TypeExpr t;
    t.kind_ = Kind::ExclusiveRef;
    t.children_.push_back(std::move(inner));
    return t;
}

TypeExpr TypeExpr::const_raw_pointer(TypeExpr inner) {
    TypeExpr t;
    t.kind_ = Kind::ConstRawPointer;
    t.children_.push_back(std::move(inner));
    return t;
}

TypeExpr TypeExpr::mut_raw_pointer(TypeExpr inner) {
    TypeExpr t;
    t.kind_ = Kind::MutRawPointer;
    t.children_.push_back(std::move(inner));
    return t;
}

TypeExpr TypeExpr::option_of(TypeExpr inner) {
    TypeExpr t;
    t.kind_ = Kind::OptionOf;
    t.children_.push_back(std::move(inner));
    return t;
}

TypeExpr TypeExpr::result_of(TypeExpr ok, TypeExpr err) {
    TypeExpr t;
    t.kind_ = Kind::ResultOf;
    t.children_.push_back(std::move(ok));
    t.children_.push_back(std::move(err));
    return t;
}

TypeExpr TypeExpr::unsupported(UnsupportedTag tag, std::string raw) {
    TypeExpr t;
    t.kind_ = Kind::Unsupported;
    t.tag_ = tag;
    t.text_ = std::move(raw);
    return t;
}

bool TypeExpr::operator==(const TypeExpr& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
        case Kind::Primitive: return prim_ == other.prim_;
        case Kind::Nominal: return text_ == other.text_;
        case Kind::Unsupported: return tag_ == other.tag_ && text_ == other.text_;
        default: break;
    }
    return children_ == other.children_;
}

std::string TypeExpr::to_string() const {
    switch (kind_) {
        case Kind::Primitive: return primitive_name(prim_);
        case Kind::Nominal: return text_;
        case Kind::SharedRef: return "&" + inner().to_string();
        case Kind::ExclusiveRef: return "&mut " + inner().to_string();
        case Kind::ConstRawPointer: return "*const " + inner().to_string();
        case Kind::MutRawPointer: return "*mut " + inner().to_string();
        case Kind::OptionOf: return "Option<" + inner().to_string() + ">";
        case Kind::ResultOf:
            return "Result<" + ok_type().to_string() + ", " + err_type().to_string() + ">";
        case Kind::Unsupported:
            return text_.empty() ? std::string("<unsupported>") : text_;
    }
    return {};
}

TypeClass classify_type(const TypeExpr& t) {
    switch (t.kind()) {
        case TypeExpr::Kind::Primitive:
            return primitive_is_dynamic(t.primitive_kind()) ? TypeClass::PrimitiveDynamic
                                                            : TypeClass::PrimitiveFixed;
        case TypeExpr::Kind::Unsupported:
            return TypeClass::Unsupported;
        case TypeExpr::Kind::SharedRef:
            // &str and &[u8] are fuzzer-suppliable just like their referents.
            if (t.inner().kind() == TypeExpr::Kind::Primitive &&
                primitive_is_dynamic(t.inner().primitive_kind())) {
                return TypeClass::PrimitiveDynamic;
            }
            return TypeClass::NonPrimitive;
        default:
            return TypeClass::NonPrimitive;
    }
}

bool is_fuzzer_suppliable(TypeClass c) {
    return c == TypeClass::PrimitiveFixed || c == TypeClass::PrimitiveDynamic;
}

TypeExpr normalize(const TypeExpr& t) {
    switch (t.kind()) {
        case TypeExpr::Kind::Primitive:
        case TypeExpr::Kind::Nominal:
        case TypeExpr::Kind::Unsupported:
            return t;
        case TypeExpr::Kind::ResultOf: {
            TypeExpr ok = normalize(t.ok_type());
            TypeExpr err = normalize(t.err_type());
            if (ok.kind() == TypeExpr::Kind::Unsupported)
                return TypeExpr::unsupported(ok.unsupported_tag(), t.to_string());
            if (err.kind() == TypeExpr::Kind::Unsupported)
                return TypeExpr::unsupported(err.unsupported_tag(), t.to_string());
            return TypeExpr::result_of(std::move(ok), std::move(err));
        }
        default: {
            TypeExpr inner = normalize(t.inner());
            if (inner.kind() == TypeExpr::Kind::Unsupported)
                return TypeExpr::unsupported(inner.unsupported_tag(), t.to_string());
            switch (t.kind()) {
                case TypeExpr::Kind::SharedRef: return TypeExpr::shared_ref(std::move(inner));
                case TypeExpr::Kind::ExclusiveRef: return TypeExpr::exclusive_ref(std::move(inner));
                case TypeExpr::Kind::ConstRawPointer:
                    return TypeExpr::const_raw_pointer(std::move(inner));
                case TypeExpr::Kind::MutRawPointer:
                    return TypeExpr::mut_raw_pointer(std::move(inner));
                case TypeExpr::Kind::OptionOf: return TypeExpr::option_of(std::move(inner));
                default: return t;
            }
        }
    }
}

std::optional<std::string> base_nominal_path(const TypeExpr& t) {
    const TypeExpr* cur = &t;
    while (true) {
        switch (cur->kind()) {
            case TypeExpr::Kind::Nominal:
                return cur->nominal_path();
            case TypeExpr::Kind::SharedRef:
            case TypeExpr::Kind::ExclusiveRef:
            case TypeExpr::Kind::ConstRawPointer:
            case TypeExpr::Kind::MutRawPointer:
            case TypeExpr::Kind::OptionOf:
                cur = &cur->inner();
                break;
            case TypeExpr::Kind::ResultOf:
                cur = &cur->ok_type();
                break;
            default:
                return std::nullopt;
        }
    }
}

const char* call_step_name(CallStep s) {
    switch (s) {
        case CallStep::DirectCall: return "direct";
        case CallStep::BorrowedRef: return "ref";
        case CallStep::MutBorrowedRef: return "mut_ref";
        case CallStep::ConstRawPtr: return "const_ptr";
        case CallStep::MutRawPtr: return "mut_ptr";
        case CallStep::DerefBorrowedRef: return "deref_ref";
        case CallStep::DerefRawPtr: return "deref_ptr";
        case CallStep::UnwrapResult: return "unwrap_result";
        case CallStep::UnwrapOption: return "unwrap_option";
        case CallStep::ToOption: return "to_option";
    }
    return "?";
}

std::string CallChain::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += " > ";
        out += call_step_name(steps[i]);
    }
    return out;
}

std::optional<TypeExpr> apply_step(CallStep step, const TypeExpr& t) {
    if (t.kind() == TypeExpr::Kind::Unsupported) return std::nullopt;
    switch (step) {
        case CallStep::DirectCall: return t;
        case CallStep::BorrowedRef: return TypeExpr::shared_ref(t);
        case CallStep::MutBorrowedRef: return TypeExpr::exclusive_ref(t);
        case CallStep::ConstRawPtr: return TypeExpr::const_raw_pointer(t);
        case CallStep::MutRawPtr: return TypeExpr::mut_raw_pointer(t);
        case CallStep::DerefBorrowedRef:
            if (t.kind() == TypeExpr::Kind::SharedRef) return t.inner();
            return std::nullopt;
        case CallStep::DerefRawPtr:
            if (t.kind() == TypeExpr::Kind::ConstRawPointer) return t.inner();
            return std::nullopt;
        case CallStep::UnwrapResult:
            if (t.kind() == TypeExpr::Kind::ResultOf) return t.ok_type();
            return std::nullopt;
        case CallStep::UnwrapOption:
            if (t.kind() == TypeExpr::Kind::OptionOf) return t.inner();
            return std::nullopt;
        case CallStep::ToOption: return TypeExpr::option_of(t);
    }
    return std::nullopt;
}

std::optional<TypeExpr> apply_chain(const CallChain& chain, const TypeExpr& producer) {
    if (chain.steps.empty()) return std::nullopt;
    TypeExpr cur = producer;
    for (CallStep s : chain.steps) {
        auto next = apply_step(s, cur);
        if (!next) return std::nullopt;
        cur = std::move(*next);
    }
    return cur;
}

std::optional<CallChain> infer_call_chain(const TypeExpr& producer, const TypeExpr& consumer,
                                          const ChainSearchRules& rules) {
    if (rules.max_depth < 1) return std::nullopt;
    if (producer.kind() == TypeExpr::Kind::Unsupported ||
        consumer.kind() == TypeExpr::Kind::Unsupported) {
        return std::nullopt;
    }
    if (producer == consumer) return CallChain{{CallStep::DirectCall}};

    const bool consumer_is_option = consumer.kind() == TypeExpr::Kind::OptionOf;

    struct Node {
        TypeExpr type;
        CallChain chain;
    };
    std::deque<Node> queue;
    std::unordered_set<std::string> visited;
    queue.push_back({producer, {}});
    visited.insert(producer.to_string());

    // FIFO expansion with steps tried in table row order yields, at the
    // minimal depth, the lexicographically least chain first.
    while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        for (int si = 0; si < kCallStepCount; ++si) {
            const auto step = static_cast<CallStep>(si);
            if (step == CallStep::DirectCall) continue;  // identity never helps mid-chain
            if (step == CallStep::DerefRawPtr && !rules.allow_pointer_deref) continue;
            if (step == CallStep::ToOption && !consumer_is_option) continue;
            auto next = apply_step(step, node.type);
            if (!next) continue;
            CallChain chain = node.chain;
            chain.steps.push_back(step);
            if (*next == consumer) return chain;
            if (static_cast<int>(chain.steps.size()) < rules.max_depth &&
                visited.insert(next->to_string()).second) {
                queue.push_back({std::move(*next), std::move(chain)});
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Type string parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_path_like(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') continue;
        if (c == ':' && i + 1 < s.size() && s[i + 1] == ':') {
            ++i;
            continue;
        }
        return false;
    }
    return true;
}

bool is_bare_generic_param(const std::string& s) {
    return s.size() == 1 && std::isupper(static_cast<unsigned char>(s[0]));
}

// Splits "A, B<C, D>, E" on commas at angle/paren/bracket depth zero.
std::vector<std::string> split_top_level_args(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '<' || c == '(' || c == '[') ++depth;
        if (c == '>' || c == ')' || c == ']') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool starts_with_word(const std::string& s, const std::string& word) {
    if (s.rfind(word, 0) != 0) return false;
    return s.size() == word.size() || !std::isalnum(static_cast<unsigned char>(s[word.size()]));
}

TypeExpr parse_type_impl(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return TypeExpr::unsupported(UnsupportedTag::Other, raw);

    if (s[0] == '&') {
        std::string rest = trim(s.substr(1));
        if (!rest.empty() && rest[0] == '\'') {
            std::size_t end = rest.find_first_of(" \t");
            std::string lifetime = rest.substr(0, end);
            if (lifetime == "'static")
                return TypeExpr::unsupported(UnsupportedTag::StaticString, s);
            rest = end == std::string::npos ? std::string() : trim(rest.substr(end));
        }
        if (starts_with_word(rest, "mut"))
            return TypeExpr::exclusive_ref(parse_type_impl(rest.substr(3)));
        return TypeExpr::shared_ref(parse_type_impl(rest));
    }

    if (s[0] == '*') {
        std::string rest = trim(s.substr(1));
        if (starts_with_word(rest, "const"))
            return TypeExpr::const_raw_pointer(parse_type_impl(rest.substr(5)));
        if (starts_with_word(rest, "mut"))
            return TypeExpr::mut_raw_pointer(parse_type_impl(rest.substr(3)));
        return TypeExpr::unsupported(UnsupportedTag::Other, s);
    }

    if (s[0] == '[') {
        if (s.back() != ']') return TypeExpr::unsupported(UnsupportedTag::Other, s);
        std::string inner = trim(s.substr(1, s.size() - 2));
        if (inner.find(';') != std::string::npos)
            return TypeExpr::unsupported(UnsupportedTag::FixedArray, s);
        if (inner == "u8") return TypeExpr::primitive(PrimitiveKind::Bytes);
        return TypeExpr::unsupported(UnsupportedTag::Other, s);
    }

    if (starts_with_word(s, "dyn")) return TypeExpr::unsupported(UnsupportedTag::TraitObject, s);
    if (starts_with_word(s, "impl")) return TypeExpr::unsupported(UnsupportedTag::Generic, s);
    if (starts_with_word(s, "async")) return TypeExpr::unsupported(UnsupportedTag::Async, s);
    if (starts_with_word(s, "Fn") || starts_with_word(s, "FnMut") ||
        starts_with_word(s, "FnOnce") || starts_with_word(s, "fn")) {
        return TypeExpr::unsupported(UnsupportedTag::Closure, s);
    }

    if (auto prim = primitive_from_name(s)) return TypeExpr::primitive(*prim);

    std::size_t lt = s.find('<');
    if (lt != std::string::npos) {
        if (s.back() != '>') return TypeExpr::unsupported(UnsupportedTag::Other, s);
        std::string head = trim(s.substr(0, lt));
        std::vector<std::string> args = split_top_level_args(s.substr(lt + 1, s.size() - lt - 2));
        if (head == "Option" && args.size() == 1)
            return TypeExpr::option_of(parse_type_impl(args[0]));
        if (head == "Result" && args.size() == 2)
            return TypeExpr::result_of(parse_type_impl(args[0]), parse_type_impl(args[1]));
        if (!is_path_like(head)) return TypeExpr::unsupported(UnsupportedTag::Other, s);
        // A concrete instantiation like Vec<u8> is an opaque nominal; an
        // instantiation over a type parameter like Vec<T> is not synthesizable.
        std::string canonical = head + "<";
        for (std::size_t i = 0; i < args.size(); ++i) {
            TypeExpr arg = parse_type_impl(args[i]);
            if (arg.kind() == TypeExpr::Kind::Unsupported)
                return TypeExpr::unsupported(UnsupportedTag::Generic, s);
            if (i) canonical += ", ";
            canonical += arg.to_string();
        }
        canonical += ">";
        return TypeExpr::nominal(canonical);
    }

    if (is_bare_generic_param(s)) return TypeExpr::unsupported(UnsupportedTag::Generic, s);
    if (is_path_like(s)) return TypeExpr::nominal(s);
    return TypeExpr::unsupported(UnsupportedTag::Other, s);
}

}  // namespace

TypeExpr parse_type_string(const std::string& text) { return normalize(parse_type_impl(text)); }

// ---------------------------------------------------------------------------
// API spec document parsing
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_col_of_offset(const std::string& text,
                                                       std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const json& require_field(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError("missing field \"" + std::string(key) + "\" in " + context);
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
    const json& v = require_field(obj, key, context);
    if (!v.is_string())
        throw ParseError("field \"" + std::string(key) + "\" in " + context +
                         " must be a string");
    return v.get<std::string>();
}

}  // namespace

ApiSpec parse_api_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(e.what(), line, col);
    }
    if (!doc.is_object()) throw ParseError("top-level value must be an object");

    ApiSpec spec;
    spec.library_name = require_string(doc, "library", "document");
    spec.library_version = require_string(doc, "version", "document");

    const json& functions = require_field(doc, "functions", "document");
    if (!functions.is_array()) throw ParseError("field \"functions\" must be an array");

    std::unordered_set<std::string> seen_ids;
    for (std::size_t i = 0; i < functions.size(); ++i) {
        const json& f = functions[i];
        std::string context = "functions[" + std::to_string(i) + "]";
        if (!f.is_object()) throw ParseError(context + " must be an object");

        ApiFunction fn;
        fn.id = require_string(f, "id", context);
        context = "function \"" + fn.id + "\"";
        fn.path = require_string(f, "path", context);
        if (f.contains("is_method")) {
            if (!f["is_method"].is_boolean())
                throw ParseError("field \"is_method\" in " + context + " must be a bool");
            fn.is_method = f["is_method"].get<bool>();
        }

        const json& params = require_field(f, "params", context);
        if (!params.is_array())
            throw ParseError("field \"params\" in " + context + " must be an array");
        for (const json& p : params) {
            if (!p.is_string())
                throw ParseError("params entries in " + context + " must be strings");
            fn.params.push_back(parse_type_string(p.get<std::string>()));
        }

        if (f.contains("ret") && !f["ret"].is_null()) {
            if (!f["ret"].is_string())
                throw ParseError("field \"ret\" in " + context + " must be a string or null");
            std::string ret_text = trim(f["ret"].get<std::string>());
            if (!ret_text.empty() && ret_text != "()") fn.ret = parse_type_string(ret_text);
        }

        if (fn.is_method && fn.params.empty())
            throw ParseError("method " + context + " must have a receiver parameter");
        if (!seen_ids.insert(fn.id).second) throw DuplicateIdError(fn.id);
        spec.functions.push_back(std::move(fn));
    }
    return spec;
}

}  // namespace ftg
