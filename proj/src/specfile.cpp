#include <fstream>
#include <set>
#include <sstream>

#include "fspvm/specfile.hpp"

namespace fspvm::specfile {

using germ::Value;
using ir::Int;

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string err_at(int line, const std::string& msg) {
    return "line " + std::to_string(line) + ": " + msg;
}

// Splits `key = value` at the first '='; a '==' there means the line is a
// formula, not an assignment.
bool split_kv(const std::string& line, std::string& key, std::string& value) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) return false;
    if (eq + 1 < line.size() && line[eq + 1] == '=') return false;
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    return !key.empty();
}

bool parse_count(const std::string& text, uint64_t& out) {
    if (text.empty()) return false;
    uint64_t v = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + uint64_t(c - '0');
    }
    out = v;
    return true;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
            return false;
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

// Literal forms accepted in [pre] and symbol bindings: true/false, decimal
// with optional sign, 0x hex. Hex becomes an address when no integer type is
// requested, the requested integer's value otherwise.
std::optional<Value> parse_literal(const std::string& text,
                                   const std::optional<ir::LType>& want,
                                   unsigned default_bits) {
    if (text == "true" || text == "false") {
        if (want && !want->is_bool()) return std::nullopt;
        return Value::boolean(text == "true");
    }
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
        std::string hex = text.substr(2);
        if (hex.empty() || hex.size() > 40) return std::nullopt;
        Int v = 0;
        std::vector<uint8_t> bytes;
        {
            std::string padded = hex.size() % 2 ? "0" + hex : hex;
            for (size_t i = 0; i < padded.size(); i += 2) {
                int hi, lo;
                auto digit = [](char c) -> int {
                    if (c >= '0' && c <= '9') return c - '0';
                    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                    return -1;
                };
                hi = digit(padded[i]);
                lo = digit(padded[i + 1]);
                if (hi < 0 || lo < 0) return std::nullopt;
                bytes.push_back(uint8_t(hi * 16 + lo));
                v = v * 256 + (hi * 16 + lo);
            }
        }
        if (want && want->is_int())
            return Value::integer(want->bits(), want->sign(),
                                  ir::wrap_int(v, want->bits()));
        if (want && !(*want == ir::LType::address())) return std::nullopt;
        std::vector<uint8_t> addr(20, 0);
        std::copy(bytes.begin(), bytes.end(), addr.end() - bytes.size());
        return Value::from_literal(ir::Literal::address_lit(std::move(addr)));
    }
    std::string digits = text;
    bool neg = false;
    if (!digits.empty() && digits[0] == '-') {
        neg = true;
        digits = digits.substr(1);
    }
    if (digits.empty()) return std::nullopt;
    Int mag = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        mag = mag * 10 + (c - '0');
    }
    Int v = neg ? Int(-mag) : mag;
    if (want) {
        if (!want->is_int()) return std::nullopt;
        if (neg && want->sign() == ir::Sign::Unsigned) return std::nullopt;
        return Value::integer(want->bits(), want->sign(), ir::wrap_int(v, want->bits()));
    }
    if (neg)
        return Value::integer(default_bits, ir::Sign::Signed,
                              ir::wrap_int(v, default_bits));
    return Value::integer(default_bits, ir::Sign::Unsigned,
                          ir::wrap_int(v, default_bits));
}

}  // namespace

std::string SpecFileData::serialize() const {
    std::ostringstream out;
    out << "[spec]\n";
    out << "name = " << name << '\n';
    out << "program = " << program << '\n';
    out << "entry = " << entry << '\n';
    out << "mode = " << mode << '\n';
    out << "uint_width = " << uint_width << '\n';
    out << "\n[symbols]\n";
    for (const auto& s : symbols) {
        out << s.name << ": " << s.type_text;
        if (s.binding_text) out << " = " << *s.binding_text;
        out << '\n';
    }
    out << "\n[pre]\n";
    for (const auto& p : pre) out << p.target << " = " << p.value_text << '\n';
    if (!constraint_text.empty()) out << "constraint = " << constraint_text << '\n';
    out << "\n[post]\n";
    if (!result_text.empty()) out << "result = " << result_text << '\n';
    for (const auto& a : asserts)
        out << "assert " << a.target << " == " << a.expr_text << '\n';
    out << "\n[fuel]\n";
    out << "k_stmt = " << fuel.k_stmt << '\n';
    out << "k_val = " << fuel.k_val << '\n';
    out << "gas_limit = " << fuel.gas << '\n';
    return out.str();
}

ParseOutcome parse_spec(const std::string& text) {
    SpecFileData d;
    d.mode.clear();  // distinguish "absent" from the default while parsing
    std::istringstream in(text);
    std::string raw;
    std::string section;
    bool have_constraint = false;
    int n = 0;
    while (std::getline(in, raw)) {
        ++n;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') return {std::nullopt, err_at(n, "unclosed section")};
            section = line.substr(1, line.size() - 2);
            if (section != "spec" && section != "symbols" && section != "pre" &&
                section != "post" && section != "fuel")
                return {std::nullopt, err_at(n, "unknown section: " + section)};
            continue;
        }
        if (section.empty())
            return {std::nullopt, err_at(n, "content before the first section")};
        if (section == "spec") {
            std::string key, value;
            if (!split_kv(line, key, value))
                return {std::nullopt, err_at(n, "expected key = value")};
            if (key == "name") {
                d.name = value;
            } else if (key == "program") {
                d.program = value;
            } else if (key == "entry") {
                d.entry = value;
            } else if (key == "mode") {
                if (value != "static" && value != "concolic" && value != "selective")
                    return {std::nullopt, err_at(n, "unknown mode: " + value)};
                d.mode = value;
            } else if (key == "uint_width") {
                uint64_t w;
                if (!parse_count(value, w) || w == 0 || w > 256)
                    return {std::nullopt, err_at(n, "bad uint_width: " + value)};
                d.uint_width = unsigned(w);
            } else {
                return {std::nullopt, err_at(n, "unknown key: " + key)};
            }
        } else if (section == "symbols") {
            size_t colon = line.find(':');
            if (colon == std::string::npos)
                return {std::nullopt, err_at(n, "expected name: type")};
            SymbolLine s;
            s.name = trim(line.substr(0, colon));
            std::string rest = trim(line.substr(colon + 1));
            size_t eq = rest.find('=');
            if (eq != std::string::npos) {
                s.type_text = trim(rest.substr(0, eq));
                s.binding_text = trim(rest.substr(eq + 1));
                if (s.binding_text->empty())
                    return {std::nullopt, err_at(n, "empty binding")};
            } else {
                s.type_text = rest;
            }
            if (!is_identifier(s.name) || s.type_text.empty())
                return {std::nullopt, err_at(n, "expected name: type")};
            d.symbols.push_back(std::move(s));
        } else if (section == "pre") {
            std::string key, value;
            if (!split_kv(line, key, value))
                return {std::nullopt, err_at(n, "expected identifier = value")};
            if (key == "constraint") {
                if (have_constraint)
                    return {std::nullopt, err_at(n, "second constraint")};
                if (value.empty()) return {std::nullopt, err_at(n, "empty constraint")};
                d.constraint_text = value;
                have_constraint = true;
            } else {
                if (!is_identifier(key))
                    return {std::nullopt, err_at(n, "bad identifier: " + key)};
                if (value.empty()) return {std::nullopt, err_at(n, "empty value")};
                d.pre.push_back({key, value});
            }
        } else if (section == "post") {
            if (line.rfind("assert ", 0) == 0) {
                std::string body = trim(line.substr(7));
                size_t eq = body.find("==");
                if (eq == std::string::npos)
                    return {std::nullopt, err_at(n, "expected assert target == expr")};
                AssertLine a;
                a.target = trim(body.substr(0, eq));
                a.expr_text = trim(body.substr(eq + 2));
                if (!is_identifier(a.target) || a.expr_text.empty())
                    return {std::nullopt, err_at(n, "expected assert target == expr")};
                d.asserts.push_back(std::move(a));
                continue;
            }
            std::string key, value;
            if (!split_kv(line, key, value))
                return {std::nullopt, err_at(n, "expected result or assert line")};
            if (key != "result")
                return {std::nullopt, err_at(n, "unknown key: " + key)};
            if (value != "rollback" && value != "out_of_gas")
                return {std::nullopt, err_at(n, "unknown result: " + value)};
            if (!d.result_text.empty())
                return {std::nullopt, err_at(n, "second result line")};
            d.result_text = value;
        } else {  // fuel
            std::string key, value;
            if (!split_kv(line, key, value))
                return {std::nullopt, err_at(n, "expected key = value")};
            uint64_t v;
            if (!parse_count(value, v))
                return {std::nullopt, err_at(n, "bad count: " + value)};
            if (key == "k_stmt") {
                d.fuel.k_stmt = v;
            } else if (key == "k_val") {
                d.fuel.k_val = v;
            } else if (key == "gas_limit") {
                d.fuel.gas = v;
            } else {
                return {std::nullopt, err_at(n, "unknown key: " + key)};
            }
        }
    }
    if (d.mode.empty()) d.mode = "static";
    if (d.name.empty()) return {std::nullopt, "missing spec name"};
    if (d.program.empty()) return {std::nullopt, "missing program path"};
    if (d.entry.empty()) return {std::nullopt, "missing entry function"};
    if (d.result_text.empty() && d.asserts.empty())
        return {std::nullopt, "missing postcondition"};
    if (!d.result_text.empty() && !d.asserts.empty())
        return {std::nullopt, "postcondition mixes result and assert lines"};
    return {std::move(d), ""};
}

ParseOutcome load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {std::nullopt, "cannot read " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

BindOutcome bind_spec(const SpecFileData& data, ir::Program program,
                      const symexec::VerifyOptions& opts) {
    BindOutcome out;
    out.mode = data.mode;
    symexec::HoareSpec spec;
    spec.name = data.name;
    spec.program = std::move(program);
    spec.entry = data.entry;

    std::map<std::string, ir::LType> types;
    for (const auto& s : data.symbols) {
        auto ty = symexec::scalar_type_from_text(s.type_text);
        if (!ty) {
            out.error = "unknown symbol type: " + s.type_text;
            return out;
        }
        if (!types.emplace(s.name, *ty).second) {
            out.error = "duplicate symbol: " + s.name;
            return out;
        }
        symexec::SymbolDecl decl;
        decl.name = s.name;
        decl.ty = *ty;
        if (s.binding_text) {
            auto v = parse_literal(*s.binding_text, *ty, data.uint_width);
            if (!v) {
                out.error = "bad binding for " + s.name + ": " + *s.binding_text;
                return out;
            }
            decl.binding = std::move(*v);
        }
        spec.symbols.push_back(std::move(decl));
    }

    auto resolver = [&](const std::string& name) -> std::optional<symexec::SymValue> {
        auto it = types.find(name);
        if (it == types.end()) return std::nullopt;
        return symexec::SymValue::sym(name, it->second);
    };

    for (const auto& p : data.pre) {
        if (!symexec::known_target(p.target, opts)) {
            out.error = "unknown identifier: " + p.target;
            return out;
        }
        symexec::PreAssign pa;
        pa.target = p.target;
        if (types.count(p.value_text)) {
            pa.symbol = p.value_text;
        } else {
            auto v = parse_literal(p.value_text, std::nullopt, data.uint_width);
            if (!v) {
                out.error = "bad value for " + p.target + ": " + p.value_text;
                return out;
            }
            pa.literal = std::move(*v);
        }
        spec.pre.push_back(std::move(pa));
    }

    if (!data.constraint_text.empty()) {
        auto parsed =
            symexec::parse_formula(data.constraint_text, resolver, data.uint_width);
        if (!parsed.formula) {
            out.error = "constraint: " + parsed.error;
            return out;
        }
        spec.constraint = std::move(*parsed.formula);
    }

    if (data.result_text == "rollback") {
        spec.post.kind = symexec::Postcondition::Kind::Rollback;
    } else if (data.result_text == "out_of_gas") {
        spec.post.kind = symexec::Postcondition::Kind::OutOfGas;
    } else {
        spec.post.kind = symexec::Postcondition::Kind::Assertions;
        for (const auto& a : data.asserts) {
            if (!symexec::known_target(a.target, opts)) {
                out.error = "unknown identifier: " + a.target;
                return out;
            }
            auto parsed = symexec::parse_formula(a.expr_text, resolver, data.uint_width);
            if (!parsed.formula) {
                out.error = "assert " + a.target + ": " + parsed.error;
                return out;
            }
            symexec::Assertion as;
            as.target = a.target;
            as.expected = std::move(*parsed.formula);
            spec.post.assertions.push_back(std::move(as));
        }
    }

    out.spec = std::move(spec);
    return out;
}

}  // namespace fspvm::specfile
