#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gamla::cli {

inline constexpr const char* kToolName = "gamla";
inline constexpr const char* kToolVersion = "0.1.0";

enum class ValueType { Bool, UInt, Real, Text, UIntList, RealList };

/// Flat, typed key=value configuration with section prefixes such as
/// `round1.lr`. Every key has a default; unknown keys are rejected.
class RunConfig {
public:
    RunConfig();

    /// key=value text (`[section]` headers allowed, '#' comments) or a JSON
    /// object, chosen by the first non-blank character.
    void merge_file(const std::filesystem::path& path);
    void merge_text(const std::string& text, const std::string& origin);
    void merge_json(const nlohmann::json& doc, const std::string& origin);
    /// One `key=value` assignment.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    bool flag(const std::string& key) const;
    std::uint64_t uint(const std::string& key) const;
    double real(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    std::vector<std::uint64_t> uint_list(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;

    /// Sorted `key=value` lines in canonical form.
    std::string canonical() const;
    /// Typed JSON object of every key.
    nlohmann::json echo() const;
    /// 16 hex digits of a stable hash of `canonical()`.
    std::string hash() const;

    static std::vector<std::string> keys();

private:
    struct Entry {
        ValueType type;
        std::string value; // canonical
    };
    const Entry& entry(const std::string& key) const;

    std::map<std::string, Entry> values_;
};

/// Canonical spelling of `raw` for the given type; throws SchemaError.
std::string canonicalize(ValueType type, const std::string& raw, const std::string& key);

} // namespace gamla::cli
