#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "ftg/synth.hpp"

namespace ftg {

namespace {

std::string sanitize_crate_name(const std::string& name) {
    std::string out = name;
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

std::string decoder_body(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::Bool:
            return "fn decode_bool(data: &[u8], offset: usize) -> bool {\n"
                   "    data[offset] & 1 != 0\n"
                   "}\n";
        case PrimitiveKind::U8:
            return "fn decode_u8(data: &[u8], offset: usize) -> u8 {\n"
                   "    data[offset]\n"
                   "}\n";
        case PrimitiveKind::I8:
            return "fn decode_i8(data: &[u8], offset: usize) -> i8 {\n"
                   "    data[offset] as i8\n"
                   "}\n";
        case PrimitiveKind::U16:
        case PrimitiveKind::U32:
        case PrimitiveKind::U64:
        case PrimitiveKind::I16:
        case PrimitiveKind::I32:
        case PrimitiveKind::I64:
        case PrimitiveKind::F32:
        case PrimitiveKind::F64: {
            std::string name = primitive_name(kind);
            std::string width = std::to_string(primitive_width_bytes(kind));
            return "fn decode_" + name + "(data: &[u8], offset: usize) -> " + name + " {\n" +
                   "    let mut bytes = [0u8; " + width + "];\n" +
                   "    bytes.copy_from_slice(&data[offset..offset + " + width + "]);\n" +
                   "    " + name + "::from_le_bytes(bytes)\n" + "}\n";
        }
        case PrimitiveKind::Usize:
            return "fn decode_usize(data: &[u8], offset: usize) -> usize {\n"
                   "    decode_u64(data, offset) as usize\n"
                   "}\n";
        case PrimitiveKind::Isize:
            return "fn decode_isize(data: &[u8], offset: usize) -> isize {\n"
                   "    decode_i64(data, offset) as isize\n"
                   "}\n";
        case PrimitiveKind::Char:
            // Four raw bytes reduced into the valid scalar space, skipping
            // the surrogate gap, so every input decodes to a char.
            return "fn decode_char(data: &[u8], offset: usize) -> char {\n"
                   "    let n = decode_u32(data, offset) % 0x10F800;\n"
                   "    let n = if n < 0xD800 { n } else { n + 0x800 };\n"
                   "    char::from_u32(n).unwrap()\n"
                   "}\n";
        case PrimitiveKind::Str:
            return "fn decode_str(data: &[u8]) -> &str {\n"
                   "    match std::str::from_utf8(data) {\n"
                   "        Ok(s) => s,\n"
                   "        Err(_) => std::process::exit(0),\n"
                   "    }\n"
                   "}\n";
        case PrimitiveKind::Bytes:
            return "fn decode_bytes(data: &[u8]) -> &[u8] {\n"
                   "    data\n"
                   "}\n";
    }
    return {};
}

std::string argument_expression(const ArgBinding& arg) {
    if (arg.kind == ArgBinding::Kind::Primitive) return "p" + std::to_string(arg.slot_id);
    std::string expr = "v" + std::to_string(arg.stmt_index);
    for (CallStep step : arg.chain.steps) {
        switch (step) {
            case CallStep::DirectCall: break;
            case CallStep::BorrowedRef: expr = "&" + expr; break;
            case CallStep::MutBorrowedRef: expr = "&mut " + expr; break;
            case CallStep::ConstRawPtr: expr = "(&" + expr + " as *const _)"; break;
            case CallStep::MutRawPtr: expr = "(&mut " + expr + " as *mut _)"; break;
            case CallStep::DerefBorrowedRef: expr = "(*" + expr + ")"; break;
            case CallStep::DerefRawPtr: expr = "unsafe { *(" + expr + ") }"; break;
            case CallStep::UnwrapResult:
                expr += ".unwrap_or_else(|_| std::process::exit(0))";
                break;
            case CallStep::UnwrapOption:
                expr += ".unwrap_or_else(|| std::process::exit(0))";
                break;
            case CallStep::ToOption: expr = "Some(" + expr + ")"; break;
        }
    }
    return expr;
}

}  // namespace

bool RustRenderer::supports_kind(PrimitiveKind) const { return true; }

std::string RustRenderer::render(const ProgramPlan& plan, const InputLayout& layout,
                                 const DependencyGraph& graph,
                                 const RenderOptions& options) const {
    std::ostringstream out;

    out << "// Generated fuzz target for " << options.library_name << ".\n";
    out << "// Sequence:";
    for (std::size_t i = 0; i < plan.statements.size(); ++i) {
        out << (i == 0 ? " " : " -> ") << graph.api_nodes[plan.statements[i].call].function.id;
    }
    out << "\n\n";
    out << "#![allow(unused_imports)]\n\n";
    out << "use " << sanitize_crate_name(options.library_name) << ";\n\n";
    out << "const MIN_BUFFER_LEN: usize = " << layout.min_buffer_len << ";\n\n";

    // Decoder templates, restricted to the kinds this target uses.
    std::set<PrimitiveKind> kinds;
    for (const FixedSlot& s : layout.fixed_slots) kinds.insert(s.kind);
    for (const DynamicSlot& s : layout.dynamic_slots) kinds.insert(s.kind);
    if (kinds.count(PrimitiveKind::Char)) kinds.insert(PrimitiveKind::U32);
    if (kinds.count(PrimitiveKind::Usize)) kinds.insert(PrimitiveKind::U64);
    if (kinds.count(PrimitiveKind::Isize)) kinds.insert(PrimitiveKind::I64);
    for (PrimitiveKind k : kinds) out << decoder_body(k) << "\n";

    bool uses_buffer = !layout.fixed_slots.empty() || !layout.dynamic_slots.empty();
    out << "fn run(" << (uses_buffer ? "data" : "_data") << ": &[u8]) {\n";
    if (layout.min_buffer_len > 0) {
        out << "    if data.len() < MIN_BUFFER_LEN {\n";
        out << "        std::process::exit(0);\n";
        out << "    }\n";
    }

    std::size_t fixed_total = 0;
    for (const FixedSlot& s : layout.fixed_slots) {
        out << "    let p" << s.slot_id << " = decode_" << primitive_name(s.kind) << "(data, "
            << s.offset << ");\n";
        fixed_total = s.offset + s.width;
    }

    if (!layout.dynamic_slots.empty()) {
        std::size_t d = layout.dynamic_slots.size();
        out << "    let rem = data.len()"
            << (fixed_total > 0 ? " - " + std::to_string(fixed_total) : "") << ";\n";
        out << "    let share = rem / " << d << ";\n";
        out << "    let extra = rem % " << d << ";\n";
        for (std::size_t i = 0; i < d; ++i) {
            const DynamicSlot& s = layout.dynamic_slots[i];
            if (i == 0) {
                out << "    let start0 = " << fixed_total << ";\n";
            } else {
                out << "    let start" << i << " = start" << i - 1 << " + len" << i - 1 << ";\n";
            }
            out << "    let len" << i << " = share + if " << i << " < extra { 1 } else { 0 };\n";
            out << "    let p" << s.slot_id << " = decode_" << primitive_name(s.kind) << "(&data[start"
                << i << "..start" << i << " + len" << i << "]);\n";
        }
    }

    for (const Statement& stmt : plan.statements) {
        const ApiFunction& fn = graph.api_nodes[stmt.call].function;
        std::string call = fn.path + "(";
        for (std::size_t i = 0; i < stmt.args.size(); ++i) {
            if (i) call += ", ";
            call += argument_expression(stmt.args[i]);
        }
        call += ")";
        out << "    ";
        if (stmt.has_result) {
            bool named = stmt.result_used || stmt.needs_mut;
            out << "let " << (stmt.needs_mut ? "mut " : "") << (named ? "" : "_")
                << stmt.result_name << " = " << call << ";\n";
        } else {
            out << call << ";\n";
        }
    }
    out << "}\n";

    if (options.emit_main) {
        out << "\nfn main() {\n";
        out << "    use std::io::Read;\n";
        out << "    let mut data = Vec::new();\n";
        out << "    if std::io::stdin().read_to_end(&mut data).is_err() {\n";
        out << "        std::process::exit(0);\n";
        out << "    }\n";
        out << "    run(&data);\n";
        out << "}\n";
    }
    return out.str();
}

}  // namespace ftg
