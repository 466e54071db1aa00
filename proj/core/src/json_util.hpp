#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ersaa/errors.hpp"
#include "ersaa/linalg.hpp"

// Strict helpers over nlohmann::json: unknown keys are rejected and every
// extraction failure names the offending location.
namespace ersaa::jsonutil {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) fail(where, "unknown key '" + it.key() + "'");
    }
}

inline const json& require_key(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        fail(where, std::string("missing key '") + key + "'");
    return *it;
}

inline double get_double(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

inline std::size_t get_size(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(where, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

inline std::uint64_t get_u64(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(where, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> get_vec(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) out.push_back(get_double(e, where));
    return out;
}

inline std::vector<std::size_t> get_size_vec(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of integers");
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const json& e : v) out.push_back(get_size(e, where));
    return out;
}

inline linalg::Matrix get_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of rows");
    const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
    if (cols == 0) fail(where, "expected nonempty rows");
    linalg::Matrix m(v.size(), cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const json& row = v[i];
        if (!row.is_array() || row.size() != cols) fail(where, "ragged rows");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = get_double(row[j], where);
    }
    return m;
}

/// Box bound entry: a number, "inf" / "-inf", or null for the default side.
inline double get_bound(const json& v, bool lower_side, const std::string& where) {
    const double inf = std::numeric_limits<double>::infinity();
    if (v.is_null()) return lower_side ? -inf : inf;
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return inf;
        if (s == "-inf") return -inf;
    }
    fail(where, "expected a number, \"inf\", \"-inf\", or null");
}

inline json matrix_to_json(const linalg::Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json parse_or_throw(const std::string& text, const std::string& where) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(where, "not valid JSON");
    return doc;
}

} // namespace ersaa::jsonutil
