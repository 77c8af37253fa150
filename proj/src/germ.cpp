#include "fspvm/germ.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace fspvm::germ {

// ---------------------------------------------------------------------------
// Value

Value Value::integer(unsigned bits, ir::Sign sign, Int v) {
    Value out;
    out.kind_ = Kind::IntV;
    out.bits_ = bits;
    out.sign_ = sign;
    out.i_ = ir::wrap_int(v, bits);
    return out;
}

Value Value::floating(double v) {
    Value out;
    out.kind_ = Kind::FloatV;
    out.f_ = v;
    return out;
}

Value Value::boolean(bool v) {
    Value out;
    out.kind_ = Kind::BoolV;
    out.b_ = v;
    return out;
}

Value Value::string_v(std::string s) {
    Value out;
    out.kind_ = Kind::StringV;
    out.str_ = std::move(s);
    return out;
}

Value Value::bytes_v(std::vector<uint8_t> data) {
    Value out;
    out.kind_ = Kind::BytesV;
    out.bytes_ = std::move(data);
    return out;
}

Value Value::struct_v(std::string layout, std::vector<Value> members) {
    Value out;
    out.kind_ = Kind::StructV;
    out.str_ = std::move(layout);
    out.kids_ = std::move(members);
    return out;
}

Value Value::array_v(ir::LType elem, std::vector<Value> items) {
    Value out;
    out.kind_ = Kind::ArrayV;
    out.ty1_ = std::move(elem);
    out.kids_ = std::move(items);
    return out;
}

Value Value::mapping_v(ir::LType key_ty, ir::LType val_ty, Value dflt) {
    Value out;
    out.kind_ = Kind::MappingV;
    out.ty1_ = std::move(key_ty);
    out.ty2_ = std::move(val_ty);
    out.dflt_ = std::make_shared<const Value>(std::move(dflt));
    return out;
}

Value Value::statement_v(ir::StmtPtr s) {
    Value out;
    out.kind_ = Kind::StatementV;
    out.stmt_ = std::move(s);
    return out;
}

Value Value::ptr_var(ir::LabelAddress a) {
    Value out;
    out.kind_ = Kind::PtrVar;
    out.addr_ = a;
    return out;
}

Value Value::ptr_par(ir::LabelAddress a) {
    Value out;
    out.kind_ = Kind::PtrPar;
    out.addr_ = a;
    return out;
}

Value Value::ptr_fun(ir::LabelAddress a) {
    Value out;
    out.kind_ = Kind::PtrFun;
    out.addr_ = a;
    return out;
}

Value Value::ptr_contract(ir::LabelAddress a) {
    Value out;
    out.kind_ = Kind::PtrContract;
    out.addr_ = a;
    return out;
}

Value Value::from_literal(const ir::Literal& lit) {
    switch (lit.ty.kind()) {
        case ir::LType::Kind::Undef: return undef();
        case ir::LType::Kind::Bool: return boolean(lit.b);
        case ir::LType::Kind::Int: return integer(lit.ty.bits(), lit.ty.sign(), lit.i);
        case ir::LType::Kind::Float: return floating(lit.f);
        case ir::LType::Kind::String: return string_v(lit.str);
        case ir::LType::Kind::Bytes:
        case ir::LType::Kind::Address: return bytes_v(lit.bytes);
        default: return undef();
    }
}

Int Value::int_signed() const {
    if (sign_ == ir::Sign::Signed) return ir::to_signed(i_, bits_);
    return i_;
}

Value Value::with_member(size_t idx, Value v) const {
    Value out = *this;
    out.kids_[idx] = std::move(v);
    return out;
}

Value Value::with_item(size_t idx, Value v) const {
    Value out = *this;
    out.kids_[idx] = std::move(v);
    return out;
}

const Value& Value::map_get(const Value& key) const {
    for (size_t i = 0; i < map_entry_count(); ++i)
        if (map_entry_key(i) == key) return map_entry_val(i);
    return *dflt_;
}

Value Value::map_set(const Value& key, Value v) const {
    Value out = *this;
    bool is_default = (v == *dflt_);
    for (size_t i = 0; i < map_entry_count(); ++i) {
        if (map_entry_key(i) == key) {
            if (is_default) {
                out.kids_.erase(out.kids_.begin() + 2 * i,
                                out.kids_.begin() + 2 * i + 2);
            } else {
                out.kids_[2 * i + 1] = std::move(v);
            }
            return out;
        }
    }
    if (is_default) return out;
    // Insert keeping keys ordered (canonical representation).
    size_t pos = 0;
    while (pos < out.map_entry_count() && value_less(out.map_entry_key(pos), key)) ++pos;
    out.kids_.insert(out.kids_.begin() + 2 * pos, {key, std::move(v)});
    return out;
}

bool Value::operator==(const Value& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case Kind::Undef: return true;
        case Kind::IntV: return bits_ == o.bits_ && sign_ == o.sign_ && i_ == o.i_;
        case Kind::FloatV: return f_ == o.f_;
        case Kind::BoolV: return b_ == o.b_;
        case Kind::StringV: return str_ == o.str_;
        case Kind::BytesV: return bytes_ == o.bytes_;
        case Kind::StructV: return str_ == o.str_ && kids_ == o.kids_;
        case Kind::ArrayV: return ty1_ == o.ty1_ && kids_ == o.kids_;
        case Kind::MappingV:
            return ty1_ == o.ty1_ && ty2_ == o.ty2_ && *dflt_ == *o.dflt_ &&
                   kids_ == o.kids_;
        case Kind::StatementV: return ir::equal(stmt_, o.stmt_);
        case Kind::PtrVar:
        case Kind::PtrPar:
        case Kind::PtrFun:
        case Kind::PtrContract: return addr_ == o.addr_;
    }
    return false;
}

namespace {
int kind_rank(Value::Kind k) { return static_cast<int>(k); }

std::string bytes_hex(const std::vector<uint8_t>& data) {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}
}  // namespace

bool value_less(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return kind_rank(a.kind()) < kind_rank(b.kind());
    switch (a.kind()) {
        case Value::Kind::IntV:
            if (a.int_bits() != b.int_bits()) return a.int_bits() < b.int_bits();
            if (a.int_sign() != b.int_sign()) return a.int_sign() < b.int_sign();
            return a.int_mag() < b.int_mag();
        case Value::Kind::BoolV: return a.bool_val() < b.bool_val();
        case Value::Kind::StringV: return a.string_val() < b.string_val();
        case Value::Kind::BytesV: return a.bytes_val() < b.bytes_val();
        case Value::Kind::FloatV: return a.float_val() < b.float_val();
        default: return false;  // aggregates never key mappings (typing invariant)
    }
}

std::string Value::text() const {
    std::ostringstream out;
    switch (kind_) {
        case Kind::Undef: out << "undef"; break;
        case Kind::IntV:
            out << "(int " << bits_ << (sign_ == ir::Sign::Unsigned ? " u " : " s ")
                << i_ << ')';
            break;
        case Kind::FloatV: out << "(float " << f_ << ')'; break;
        case Kind::BoolV: out << (b_ ? "true" : "false"); break;
        case Kind::StringV: out << '"' << str_ << '"'; break;
        case Kind::BytesV: out << bytes_hex(bytes_); break;
        case Kind::StructV: {
            out << "(struct " << str_;
            for (const auto& m : kids_) out << ' ' << m.text();
            out << ')';
            break;
        }
        case Kind::ArrayV: {
            out << "(array";
            for (const auto& m : kids_) out << ' ' << m.text();
            out << ')';
            break;
        }
        case Kind::MappingV: {
            out << "(mapping";
            for (size_t i = 0; i < map_entry_count(); ++i)
                out << " (" << map_entry_key(i).text() << " -> "
                    << map_entry_val(i).text() << ')';
            out << ')';
            break;
        }
        case Kind::StatementV: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "(code #%016llx)",
                          static_cast<unsigned long long>(
                              ir::content_hash(ir::Program{stmt_})));
            out << buf;
            break;
        }
        case Kind::PtrVar: out << "(ptr-var " << addr_.text() << ')'; break;
        case Kind::PtrPar: out << "(ptr-par " << addr_.text() << ')'; break;
        case Kind::PtrFun: out << "(ptr-fun " << addr_.text() << ')'; break;
        case Kind::PtrContract: out << "(ptr-contract " << addr_.text() << ')'; break;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// zero_value

std::optional<Value> zero_value(const ir::LType& t, const ir::StructRegistry& structs) {
    using K = ir::LType::Kind;
    switch (t.kind()) {
        case K::Undef:
        case K::Fun:
        case K::Contract:
            return std::nullopt;
        case K::Int: return Value::integer(t.bits(), t.sign(), 0);
        case K::Float: return Value::floating(0.0);
        case K::Bool: return Value::boolean(false);
        case K::String: return Value::string_v("");
        case K::Bytes: return Value::bytes_v(std::vector<uint8_t>(t.byte_len(), 0));
        case K::Address: return Value::bytes_v(std::vector<uint8_t>(20, 0));
        case K::Array: {
            std::vector<Value> items;
            if (t.array_len()) {
                auto z = zero_value(t.elem(), structs);
                if (!z) return std::nullopt;
                items.assign(static_cast<size_t>(*t.array_len()), *z);
            }
            return Value::array_v(t.elem(), std::move(items));
        }
        case K::Mapping: {
            auto z = zero_value(t.value(), structs);
            if (!z) return std::nullopt;
            return Value::mapping_v(t.key(), t.value(), std::move(*z));
        }
        case K::Struct: {
            const ir::StructLayout* layout = structs.find(t.name());
            if (!layout) return std::nullopt;
            std::vector<Value> members;
            members.reserve(layout->size());
            for (const auto& [name, mty] : *layout) {
                (void)name;
                auto z = zero_value(mty, structs);
                if (!z) return std::nullopt;
                members.push_back(std::move(*z));
            }
            return Value::struct_v(t.name(), std::move(members));
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Addresses, auth, cells

std::string MachineAddress::text() const {
    if (is_special()) return ir::special_name(special_part());
    char buf[16];
    std::snprintf(buf, sizeof buf, "_0x%08x", number());
    return buf;
}

const char* mem_error_text(MemError::Code c) {
    switch (c) {
        case MemError::Code::OutOfDomain: return "OutOfDomain";
        case MemError::Code::AuthDenied: return "AuthDenied";
        case MemError::Code::NotAllocated: return "NotAllocated";
        case MemError::Code::Exhausted: return "Exhausted";
        case MemError::Code::MapFailed: return "MapFailed";
        case MemError::Code::BadOffset: return "BadOffset";
        case MemError::Code::NoZero: return "NoZero";
    }
    return "?";
}

MemResult<MachineAddress> MapStrategy::map(ir::LabelAddress a) const {
    if (hook) return hook(a);
    if (a.is_special) return MemResult<MachineAddress>::ok(MachineAddress::special(a.special));
    if (a.index >= space)
        return MemResult<MachineAddress>::fail(MemError::Code::MapFailed,
                                               a.text() + " outside a space of " +
                                                   std::to_string(space));
    return MemResult<MachineAddress>::ok(MachineAddress::numbered(a.index));
}

MemResult<MachineAddress> map_label(ir::LabelAddress a, const MapStrategy& strategy) {
    return strategy.map(a);
}

bool Auth::admits(const std::string& env, const std::string& fenv,
                  const std::string& cell_env) const {
    switch (kind) {
        case Kind::Public:
            return true;
        case Kind::Internal:
            // Owning environment, or a caller acting within its family.
            return env == cell_env || fenv == cell_env;
        case Kind::Owner:
            return env == owner;
    }
    return false;
}

std::string Auth::text() const {
    switch (kind) {
        case Kind::Public: return "public";
        case Kind::Internal: return "internal";
        case Kind::Owner: return "owner(" + owner + ")";
    }
    return "?";
}

bool MemoryCell::operator==(const MemoryCell& o) const {
    return v == o.v && size == o.size && env == o.env && fenv == o.fenv &&
           occupied == o.occupied && auth.kind == o.auth.kind &&
           auth.owner == o.auth.owner;
}

bool Event::operator==(const Event& o) const {
    return kind == o.kind && target == o.target && amount == o.amount &&
           result == o.result && note == o.note;
}

std::string Event::text() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::Send: out << "SEND"; break;
        case Kind::Call: out << "CALL"; break;
        case Kind::Transfer: out << "TRANSFER"; break;
        case Kind::Overflow: return "OVERFLOW " + note;
    }
    out << ' ' << target.text() << ' ' << amount.text() << " -> "
        << (result ? "true" : "false");
    return out.str();
}

// ---------------------------------------------------------------------------
// StdLib

ir::LType StdLib::send_fn_ty() const {
    return ir::LType::fun({ir::LType::address(), uint_ty()}, ir::LType::boolean());
}

ir::StructLayout StdLib::msg_layout() const {
    return {{"sender", ir::LType::address()}, {"values", uint_ty()}};
}

ir::StructLayout StdLib::address_layout() const {
    return {{"addr", ir::LType::address()},
            {"balance", uint_ty()},
            {"send", send_fn_ty()},
            {"gas", uint_ty()}};
}

ir::StructLayout StdLib::block_layout() const {
    return {{"number", uint_ty()}, {"timestamp", uint_ty()}};
}

void StdLib::install_types(ir::TypeContext& ctx) const {
    ctx.special_layouts["msg"] = msg_layout();
    ctx.special_layouts["this"] = address_layout();
    ctx.special_layouts["block"] = block_layout();
    ctx.funs[kSendBuiltin] = send_fn_ty();
    ctx.funs[kCallBuiltin] = send_fn_ty();
    ctx.funs[kTransferBuiltin] = send_fn_ty();
    ctx.vars[kSendResultVar] = ir::LType::boolean();
}

// ---------------------------------------------------------------------------
// Memory

namespace {

Value zero_layout_struct(const std::string& name, const ir::StructLayout& layout) {
    ir::StructRegistry empty;
    std::vector<Value> members;
    members.reserve(layout.size());
    for (const auto& [mname, mty] : layout) {
        (void)mname;
        if (mty.kind() == ir::LType::Kind::Fun) {
            members.push_back(Value::ptr_fun(ir::LabelAddress::at(ir::SpecialAddr::Send)));
        } else {
            auto z = zero_value(mty, empty);
            members.push_back(z ? *z : Value::undef());
        }
    }
    return Value::struct_v(name, std::move(members));
}

}  // namespace

Memory Memory::init(size_t space, const StdLib& lib) {
    Memory m;
    m.numbered_ = space;
    m.cells_ = PArray<MemoryCell>(space + ir::kSpecialCount);

    auto lib_cell = [](Value v) {
        MemoryCell c;
        c.v = std::move(v);
        c.occupied = true;
        c.env = c.fenv = "lib";
        return c;
    };
    m.cells_ = m.cells_.set(MachineAddress::special(ir::SpecialAddr::Msg).flat,
                            lib_cell(zero_layout_struct("msg", lib.msg_layout())));
    m.cells_ = m.cells_.set(MachineAddress::special(ir::SpecialAddr::Address).flat,
                            lib_cell(zero_layout_struct("this", lib.address_layout())));
    m.cells_ = m.cells_.set(MachineAddress::special(ir::SpecialAddr::Block).flat,
                            lib_cell(zero_layout_struct("block", lib.block_layout())));
    return m;
}

Memory Memory::with_throw(bool f) const {
    Memory out = *this;
    out.throw_ = f;
    return out;
}

MemResult<Value> Memory::read(MachineAddress a, const std::string& env,
                              const std::string& fenv) const {
    if (!in_domain(a))
        return MemResult<Value>::fail(MemError::Code::OutOfDomain, a.text());
    const MemoryCell& c = cells_.get(a.flat);
    if (!c.auth.admits(env, fenv, c.env))
        return MemResult<Value>::fail(MemError::Code::AuthDenied, a.text());
    return MemResult<Value>::ok(c.v);
}

MemResult<Memory> Memory::write(MachineAddress a, Value v, const std::string& env,
                                const std::string& fenv) const {
    if (!in_domain(a))
        return MemResult<Memory>::fail(MemError::Code::OutOfDomain, a.text());
    MemoryCell c = cells_.get(a.flat);
    if (!c.auth.admits(env, fenv, c.env))
        return MemResult<Memory>::fail(MemError::Code::AuthDenied, a.text());
    c.v = std::move(v);
    c.occupied = true;
    c.env = env;
    c.fenv = fenv;
    return MemResult<Memory>::ok(write_cell(a, std::move(c)));
}

Memory Memory::write_cell(MachineAddress a, MemoryCell c) const {
    Memory out = *this;
    out.cells_ = cells_.set(a.flat, std::move(c));
    return out;
}

MemResult<std::pair<Memory, MachineAddress>> Memory::allocate(
    const std::string& env, const std::string& fenv) const {
    for (uint32_t i = 0; i < numbered_; ++i) {
        MachineAddress a = MachineAddress::numbered(i);
        const MemoryCell& c = cells_.get(a.flat);
        if (!c.occupied) {
            MemoryCell fresh;
            fresh.occupied = true;
            fresh.env = env;
            fresh.fenv = fenv;
            return MemResult<std::pair<Memory, MachineAddress>>::ok(
                {write_cell(a, std::move(fresh)), a});
        }
    }
    return MemResult<std::pair<Memory, MachineAddress>>::fail(
        MemError::Code::Exhausted, "no unoccupied cell");
}

MemResult<Memory> Memory::free_cell(MachineAddress a) const {
    if (!in_domain(a))
        return MemResult<Memory>::fail(MemError::Code::OutOfDomain, a.text());
    const MemoryCell& c = cells_.get(a.flat);
    if (!c.occupied)
        return MemResult<Memory>::fail(MemError::Code::NotAllocated, a.text());
    return MemResult<Memory>::ok(write_cell(a, MemoryCell{}));
}

std::optional<MachineAddress> Memory::search(
    const std::function<bool(MachineAddress, const MemoryCell&)>& pred) const {
    for (uint32_t f = 0; f < numbered_ + ir::kSpecialCount; ++f) {
        MachineAddress a{f};
        if (pred(a, cells_.get(f))) return a;
    }
    return std::nullopt;
}

MemResult<MachineAddress> Memory::offset(MachineAddress a, int64_t delta) const {
    if (!in_domain(a))
        return MemResult<MachineAddress>::fail(MemError::Code::OutOfDomain, a.text());
    if (a.is_special())
        return MemResult<MachineAddress>::fail(MemError::Code::BadOffset,
                                               "no arithmetic on reserved cells");
    int64_t n = static_cast<int64_t>(a.number()) + delta;
    if (n < 0 || n >= static_cast<int64_t>(numbered_))
        return MemResult<MachineAddress>::fail(MemError::Code::BadOffset,
                                               std::to_string(n));
    return MemResult<MachineAddress>::ok(
        MachineAddress::numbered(static_cast<uint32_t>(n)));
}

Memory Memory::push_event(Event e) const {
    Memory out = *this;
    auto node = std::make_shared<EventNode>();
    node->e = std::move(e);
    node->next = events_;
    node->count = (events_ ? events_->count : 0) + 1;
    out.events_ = std::move(node);
    return out;
}

size_t Memory::event_count() const { return events_ ? events_->count : 0; }

std::vector<Event> Memory::events() const {
    std::vector<Event> out;
    for (const EventNode* n = events_.get(); n; n = n->next.get())
        out.push_back(n->e);
    std::reverse(out.begin(), out.end());
    return out;
}

std::string Memory::dump() const {
    std::ostringstream out;
    out << "throw := " << (throw_ ? "true" : "false") << '\n';
    for (uint32_t f = 0; f < numbered_ + ir::kSpecialCount; ++f) {
        MachineAddress a{f};
        const MemoryCell& c = cells_.get(f);
        out << a.text() << " := " << c.v.text() << " [" << c.size << ' '
            << (c.env.empty() ? "-" : c.env) << ' ' << (c.fenv.empty() ? "-" : c.fenv)
            << ' ' << (c.occupied ? "occupied" : "free") << ' ' << c.auth.text()
            << "]\n";
    }
    return out.str();
}

bool Memory::operator==(const Memory& o) const {
    if (numbered_ != o.numbered_ || throw_ != o.throw_) return false;
    if (event_count() != o.event_count()) return false;
    {
        const EventNode* x = events_.get();
        const EventNode* y = o.events_.get();
        while (x && y && x != y) {
            if (!(x->e == y->e)) return false;
            x = x->next.get();
            y = y->next.get();
        }
    }
    return cells_.equal(o.cells_,
                        [](const MemoryCell& x, const MemoryCell& y) { return x == y; });
}

}  // namespace fspvm::germ
