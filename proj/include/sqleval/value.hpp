#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "sqleval/error.hpp"
#include "sqleval/json.hpp"

namespace sqleval {

// One database cell. Immutable after construction.
class SqlValue {
public:
    enum class Kind { null, integer, real, text, blob };

    SqlValue() : v_(std::monostate{}) {}

    static SqlValue null() { return SqlValue(); }
    static SqlValue integer(int64_t v) { return SqlValue(v); }
    static SqlValue real(double v) { return SqlValue(v); }
    static SqlValue text(std::string v) { return SqlValue(TextBytes{std::move(v)}); }
    static SqlValue blob(std::string bytes) { return SqlValue(BlobBytes{std::move(bytes)}); }

    Kind kind() const { return static_cast<Kind>(v_.index()); }
    bool is_null() const { return kind() == Kind::null; }

    int64_t as_integer() const { return std::get<int64_t>(v_); }
    double as_real() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<TextBytes>(v_).bytes; }
    const std::string& as_blob() const { return std::get<BlobBytes>(v_).bytes; }

private:
    struct TextBytes {
        std::string bytes;
    };
    struct BlobBytes {
        std::string bytes;
    };

    explicit SqlValue(int64_t v) : v_(v) {}
    explicit SqlValue(double v) : v_(v) {}
    explicit SqlValue(TextBytes v) : v_(std::move(v)) {}
    explicit SqlValue(BlobBytes v) : v_(std::move(v)) {}

    std::variant<std::monostate, int64_t, double, TextBytes, BlobBytes> v_;
};

namespace detail {

inline bool real_equal(double a, double b) {
    if (a == b) return true;  // covers infinities of equal sign
    if (std::isnan(a) && std::isnan(b)) return true;
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(1e-12, 1e-9 * scale);
}

inline bool real_equals_integer(double r, int64_t i) {
    if (!std::isfinite(r)) return false;
    if (std::trunc(r) != r) return false;
    // int64 range check before the exact cast
    if (r < -9223372036854775808.0 || r >= 9223372036854775808.0) return false;
    return static_cast<int64_t>(r) == i;
}

}  // namespace detail

// Metric-level equality: Null == Null, Integer(i) == Real(r) when r is exactly
// i, Real vs Real within 1e-9 relative (1e-12 absolute near zero), Text and
// Blob byte-exact. This is not SQL three-valued logic.
inline bool values_equal(const SqlValue& a, const SqlValue& b) {
    using K = SqlValue::Kind;
    const K ka = a.kind();
    const K kb = b.kind();
    if (ka == K::null || kb == K::null) return ka == kb;
    if (ka == K::integer && kb == K::integer) return a.as_integer() == b.as_integer();
    if (ka == K::real && kb == K::real) return detail::real_equal(a.as_real(), b.as_real());
    if (ka == K::integer && kb == K::real) return detail::real_equals_integer(b.as_real(), a.as_integer());
    if (ka == K::real && kb == K::integer) return detail::real_equals_integer(a.as_real(), b.as_integer());
    if (ka == K::text && kb == K::text) return a.as_text() == b.as_text();
    if (ka == K::blob && kb == K::blob) return a.as_blob() == b.as_blob();
    return false;
}

inline std::string to_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

inline bool looks_like_hex_blob(std::string_view s) {
    if (s.size() < 2 || s[0] != '0' || s[1] != 'x') return false;
    if ((s.size() - 2) % 2 != 0) return false;
    for (size_t i = 2; i < s.size(); ++i) {
        char c = s[i];
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

// Report serialization: Null -> null, Blob -> "0x" + lowercase hex. Non-finite
// reals have no JSON representation and degrade to null.
inline Json value_to_json(const SqlValue& v) {
    switch (v.kind()) {
        case SqlValue::Kind::null: return nullptr;
        case SqlValue::Kind::integer: return v.as_integer();
        case SqlValue::Kind::real:
            if (!std::isfinite(v.as_real())) return nullptr;
            return v.as_real();
        case SqlValue::Kind::text: return v.as_text();
        case SqlValue::Kind::blob: return "0x" + to_hex(v.as_blob());
    }
    return nullptr;
}

// Inverse of value_to_json. A text value that itself spells "0x" + even-length
// lowercase hex is indistinguishable from a blob in this encoding and decodes
// as one.
inline SqlValue value_from_json(const Json& j) {
    if (j.is_null()) return SqlValue::null();
    if (j.is_number_integer()) return SqlValue::integer(j.get<int64_t>());
    if (j.is_number_unsigned()) return SqlValue::integer(static_cast<int64_t>(j.get<uint64_t>()));
    if (j.is_number_float()) return SqlValue::real(j.get<double>());
    if (j.is_boolean()) return SqlValue::integer(j.get<bool>() ? 1 : 0);
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (looks_like_hex_blob(s)) {
            std::string bytes;
            bytes.reserve((s.size() - 2) / 2);
            for (size_t i = 2; i < s.size(); i += 2) {
                auto nibble = [](char c) -> unsigned {
                    return c <= '9' ? static_cast<unsigned>(c - '0') : static_cast<unsigned>(c - 'a' + 10);
                };
                bytes.push_back(static_cast<char>((nibble(s[i]) << 4) | nibble(s[i + 1])));
            }
            return SqlValue::blob(std::move(bytes));
        }
        return SqlValue::text(s);
    }
    raise(Errc::corrupt_dataset, "unsupported JSON value for a grid cell: " + j.dump());
}

// Human-readable rendering used in prompt contexts and log lines.
inline std::string value_to_display(const SqlValue& v) {
    switch (v.kind()) {
        case SqlValue::Kind::null: return "NULL";
        case SqlValue::Kind::integer: return std::to_string(v.as_integer());
        case SqlValue::Kind::real: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.15g", v.as_real());
            return buf;
        }
        case SqlValue::Kind::text: return v.as_text();
        case SqlValue::Kind::blob: return "0x" + to_hex(v.as_blob());
    }
    return "NULL";
}

}  // namespace sqleval
