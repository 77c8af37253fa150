// Formal memory model: runtime values, authorization-tagged cells, and a
// persistent (copy-on-write) address-indexed store. Every mutation returns a
// fresh Memory sharing structure with its predecessor, so interpreter
// rollback and symbolic forking are O(1) snapshots.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/ir.hpp"

namespace fspvm::germ {

using ir::Int;

// ---------------------------------------------------------------------------
// Values. Closed set of 14 variants; closedness is asserted in tests and by
// the kVariantCount guard below.

class Value {
  public:
    enum class Kind : uint8_t {
        Undef, IntV, FloatV, BoolV, StringV, BytesV,
        StructV, ArrayV, MappingV, StatementV,
        PtrVar, PtrPar, PtrFun, PtrContract,
    };
    static constexpr int kVariantCount = 14;

    Value() = default;  // undef

    static Value undef() { return Value(); }
    static Value integer(unsigned bits, ir::Sign sign, Int v);
    static Value floating(double v);
    static Value boolean(bool v);
    static Value string_v(std::string s);
    static Value bytes_v(std::vector<uint8_t> data);
    static Value struct_v(std::string layout, std::vector<Value> members);
    static Value array_v(ir::LType elem, std::vector<Value> items);
    // An empty mapping; absent keys read as `dflt`. Entries equal to the
    // default are canonically absent, so structural equality is stable.
    static Value mapping_v(ir::LType key_ty, ir::LType val_ty, Value dflt);
    static Value statement_v(ir::StmtPtr s);
    static Value ptr_var(ir::LabelAddress a);
    static Value ptr_par(ir::LabelAddress a);
    static Value ptr_fun(ir::LabelAddress a);
    static Value ptr_contract(ir::LabelAddress a);
    static Value from_literal(const ir::Literal& lit);

    Kind kind() const { return kind_; }
    bool is_undef() const { return kind_ == Kind::Undef; }

    unsigned int_bits() const { return bits_; }
    ir::Sign int_sign() const { return sign_; }
    const Int& int_mag() const { return i_; }       // in [0, 2^bits)
    Int int_signed() const;                          // two's-complement view
    double float_val() const { return f_; }
    bool bool_val() const { return b_; }
    const std::string& string_val() const { return str_; }
    const std::vector<uint8_t>& bytes_val() const { return bytes_; }

    const std::string& layout() const { return str_; }       // StructV
    const std::vector<Value>& members() const { return kids_; }
    Value with_member(size_t idx, Value v) const;

    const ir::LType& elem_ty() const { return ty1_; }        // ArrayV
    const std::vector<Value>& items() const { return kids_; }
    Value with_item(size_t idx, Value v) const;

    const ir::LType& key_ty() const { return ty1_; }         // MappingV
    const ir::LType& val_ty() const { return ty2_; }
    const Value& map_default() const { return *dflt_; }
    size_t map_entry_count() const { return kids_.size() / 2; }
    const Value& map_entry_key(size_t i) const { return kids_[2 * i]; }
    const Value& map_entry_val(size_t i) const { return kids_[2 * i + 1]; }
    const Value& map_get(const Value& key) const;   // default on miss
    Value map_set(const Value& key, Value v) const;  // functional update

    const ir::StmtPtr& stmt() const { return stmt_; }        // StatementV
    const ir::LabelAddress& addr() const { return addr_; }   // Ptr*

    bool operator==(const Value& o) const;
    bool operator!=(const Value& o) const { return !(*this == o); }

    std::string text() const;  // canonical one-line rendering

  private:
    Kind kind_ = Kind::Undef;
    bool b_ = false;
    double f_ = 0.0;
    unsigned bits_ = 0;
    ir::Sign sign_ = ir::Sign::Unsigned;
    Int i_;
    std::string str_;             // StringV payload or StructV layout name
    std::vector<uint8_t> bytes_;
    ir::LType ty1_, ty2_;
    std::vector<Value> kids_;     // struct members / array items / mapping k,v pairs
    std::shared_ptr<const Value> dflt_;
    ir::StmtPtr stmt_;
    ir::LabelAddress addr_;
};

// Strict ordering over scalar values (used for canonical mapping keys).
bool value_less(const Value& a, const Value& b);

// Default-valued instance of a type: 0 / false / "" / zero bytes / zero
// address / componentwise for aggregates / empty mapping. Undef, function and
// contract types have no zero; nullopt means exactly that.
std::optional<Value> zero_value(const ir::LType& t, const ir::StructRegistry& structs);

// ---------------------------------------------------------------------------
// Addresses

// Concrete cell coordinate: the 7 reserved cells occupy flat slots [0,7),
// numbered cells follow.
struct MachineAddress {
    uint32_t flat = 0;

    static MachineAddress special(ir::SpecialAddr s) {
        return {static_cast<uint32_t>(s)};
    }
    static MachineAddress numbered(uint32_t i) {
        return {static_cast<uint32_t>(ir::kSpecialCount) + i};
    }
    bool is_special() const { return flat < ir::kSpecialCount; }
    ir::SpecialAddr special_part() const { return static_cast<ir::SpecialAddr>(flat); }
    uint32_t number() const { return flat - ir::kSpecialCount; }
    bool operator==(const MachineAddress& o) const { return flat == o.flat; }
    std::string text() const;
};

struct MemError {
    enum class Code : uint8_t {
        OutOfDomain, AuthDenied, NotAllocated, Exhausted, MapFailed, BadOffset, NoZero,
    };
    Code code;
    std::string detail;
};
const char* mem_error_text(MemError::Code c);

template <typename T>
class MemResult {
  public:
    static MemResult ok(T v) {
        MemResult r;
        r.val_ = std::move(v);
        return r;
    }
    static MemResult fail(MemError::Code c, std::string detail = "") {
        MemResult r;
        r.err_ = MemError{c, std::move(detail)};
        return r;
    }
    bool ok_p() const { return val_.has_value(); }
    explicit operator bool() const { return ok_p(); }
    const T& value() const { return *val_; }
    T&& take() { return std::move(*val_); }
    const MemError& error() const { return *err_; }

  private:
    std::optional<T> val_;
    std::optional<MemError> err_;
};

// Label-to-machine mapping. The default strategy is the identity on numbered
// addresses (bounds-checked against `space`) and the reserved slot for each
// special address; `hook` lets tests substitute another total mapping.
struct MapStrategy {
    size_t space = 256;
    std::function<MemResult<MachineAddress>(ir::LabelAddress)> hook;

    MemResult<MachineAddress> map(ir::LabelAddress a) const;
};

MemResult<MachineAddress> map_label(ir::LabelAddress a, const MapStrategy& strategy);

// ---------------------------------------------------------------------------
// Cells and access control

struct Auth {
    enum class Kind : uint8_t { Public, Internal, Owner };
    Kind kind = Kind::Public;
    std::string owner;  // Owner only

    bool admits(const std::string& env, const std::string& fenv,
                const std::string& cell_env) const;
    std::string text() const;
};

struct MemoryCell {
    Value v;
    uint32_t size = 1;  // recorded, not enforced: every cell spans one slot
    std::string env, fenv;
    bool occupied = false;
    Auth auth;

    bool operator==(const MemoryCell& o) const;
};

// Execution events carried by a memory snapshot (send-family calls and
// arithmetic wraps). Appending shares the existing tail.
struct Event {
    enum class Kind : uint8_t { Send, Call, Transfer, Overflow };
    Kind kind;
    Value target;   // send family
    Value amount;
    bool result = false;
    std::string note;  // overflow: operator and width

    bool operator==(const Event& o) const;
    std::string text() const;
};

// ---------------------------------------------------------------------------
// Persistent chunked array; unset subtrees read as a shared default element.

template <typename T>
class PArray {
    static constexpr size_t kBranch = 32;
    struct Node {
        std::array<std::shared_ptr<const Node>, kBranch> kids{};
        std::vector<T> items;  // leaf payload (size kBranch)
    };
    using NodePtr = std::shared_ptr<const Node>;

  public:
    PArray() = default;
    explicit PArray(size_t n) : size_(n) {
        levels_ = 1;
        size_t cap = kBranch;
        while (cap < n) {
            cap *= kBranch;
            ++levels_;
        }
    }

    size_t size() const { return size_; }

    const T& get(size_t i) const {
        const Node* n = root_.get();
        for (unsigned lv = levels_; n && lv > 1; --lv) {
            n = n->kids[slot(i, lv)].get();
        }
        if (!n || n->items.empty()) return default_ref();
        return n->items[i % kBranch];
    }

    PArray set(size_t i, T v) const {
        PArray out = *this;
        out.root_ = set_rec(root_, levels_, i, std::move(v));
        return out;
    }

    bool same_root(const PArray& o) const { return root_ == o.root_; }

    template <typename Eq>
    bool equal(const PArray& o, Eq eq) const {
        if (size_ != o.size_) return false;
        if (root_ == o.root_) return true;
        for (size_t i = 0; i < size_; ++i) {
            // Cheap skip for shared subtrees would need aligned levels; sizes
            // here are small enough that elementwise comparison is fine.
            if (!eq(get(i), o.get(i))) return false;
        }
        return true;
    }

  private:
    static const T& default_ref() {
        static const T d{};
        return d;
    }
    static size_t slot(size_t i, unsigned level) {
        size_t shift = 5 * (level - 1);  // kBranch == 2^5
        return (i >> shift) % kBranch;
    }
    static NodePtr set_rec(const NodePtr& n, unsigned level, size_t i, T v) {
        auto out = n ? std::make_shared<Node>(*n) : std::make_shared<Node>();
        if (level <= 1) {
            if (out->items.empty()) out->items.resize(kBranch);
            out->items[i % kBranch] = std::move(v);
        } else {
            auto& child = out->kids[slot(i, level)];
            child = set_rec(child, level - 1, i, std::move(v));
        }
        return out;
    }

    NodePtr root_;
    size_t size_ = 0;
    unsigned levels_ = 1;
};

// ---------------------------------------------------------------------------
// Standard library shape for the reserved cells

inline constexpr const char* kSendBuiltin = "_0xsend";
inline constexpr const char* kCallBuiltin = "_0xcall";
inline constexpr const char* kTransferBuiltin = "_0xtransfer";
inline constexpr const char* kSendResultVar = "_0xsend_re";

struct StdLib {
    unsigned uint_bits = 256;

    ir::LType uint_ty() const { return ir::LType::integer(uint_bits, ir::Sign::Unsigned); }
    ir::LType send_fn_ty() const;  // (address, uint) -> bool

    ir::StructLayout msg_layout() const;      // sender, values
    ir::StructLayout address_layout() const;  // addr, balance, send, gas
    ir::StructLayout block_layout() const;    // number, timestamp

    // Registers the special-cell layouts, the send-family builtins and the
    // send-result variable in a typing context.
    void install_types(ir::TypeContext& ctx) const;
};

// ---------------------------------------------------------------------------
// Memory

class Memory {
  public:
    Memory() = default;

    // All numbered cells unoccupied and undef; msg/this/block carry their
    // zeroed library layouts; throw flag false.
    static Memory init(size_t space, const StdLib& lib);

    size_t space() const { return numbered_; }
    bool in_domain(MachineAddress a) const {
        return a.flat < numbered_ + ir::kSpecialCount;
    }

    bool throw_flag() const { return throw_; }
    Memory with_throw(bool f) const;

    const MemoryCell& cell(MachineAddress a) const { return cells_.get(a.flat); }

    MemResult<Value> read(MachineAddress a, const std::string& env,
                          const std::string& fenv) const;
    MemResult<Memory> write(MachineAddress a, Value v, const std::string& env,
                            const std::string& fenv) const;
    // Replaces a whole cell without an authorization check; the program
    // loader, spec preconditions and builtins go through here.
    Memory write_cell(MachineAddress a, MemoryCell c) const;

    // First-fit over numbered cells; allocated cells read as undef until
    // written.
    MemResult<std::pair<Memory, MachineAddress>> allocate(const std::string& env,
                                                          const std::string& fenv) const;
    MemResult<Memory> free_cell(MachineAddress a) const;

    std::optional<MachineAddress> search(
        const std::function<bool(MachineAddress, const MemoryCell&)>& pred) const;
    MemResult<MachineAddress> offset(MachineAddress a, int64_t delta) const;

    Memory push_event(Event e) const;
    size_t event_count() const;
    std::vector<Event> events() const;  // oldest first

    // One line per cell: reserved cells first, numbered ascending. The throw
    // flag heads the dump.
    std::string dump() const;

    bool operator==(const Memory& o) const;
    bool operator!=(const Memory& o) const { return !(*this == o); }

  private:
    struct EventNode {
        Event e;
        std::shared_ptr<const EventNode> next;
        size_t count;
    };

    PArray<MemoryCell> cells_;
    size_t numbered_ = 0;
    bool throw_ = false;
    std::shared_ptr<const EventNode> events_;
};

}  // namespace fspvm::germ
