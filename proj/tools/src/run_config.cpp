#include "gamla_cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gamla/datasets.hpp"
#include "gamla/error.hpp"

namespace gamla::cli {

namespace {

struct Default {
    const char* key;
    ValueType type;
    const char* value;
};

// clang-format off
const Default kDefaults[] = {
    {"seed",                     ValueType::UInt,     "0"},
    {"out_dir",                  ValueType::Text,     "runs"},

    {"dataset.generator",        ValueType::Text,     "quadric"},
    {"dataset.count",            ValueType::UInt,     "10000"},
    {"dataset.noise",            ValueType::Real,     "0"},
    {"dataset.hole_x1",          ValueType::Real,     "0.25"},
    {"dataset.hole_x2",          ValueType::Real,     "0.25"},
    {"dataset.hole_radius",      ValueType::Real,     "0.3"},
    {"csv.header",               ValueType::Bool,     "true"},
    {"csv.labels",               ValueType::Bool,     "false"},

    {"arch.layers",              ValueType::UIntList, "3,3,2,3,3"},
    {"box.margin",               ValueType::Real,     "0.25"},

    {"round1.lr",                ValueType::Real,     "0.01"},
    {"round1.epochs",            ValueType::UInt,     "2000"},
    {"round1.batch_size",        ValueType::UInt,     "64"},
    {"round1.optimizer",         ValueType::Text,     "adam"},
    {"round1.final_lr_fraction", ValueType::Real,     "0.001"},
    {"round1.beta1",             ValueType::Real,     "0.9"},
    {"round1.beta2",             ValueType::Real,     "0.999"},
    {"round1.adam_eps",          ValueType::Real,     "1e-08"},

    {"round2.lr",                ValueType::Real,     "0.003"},
    {"round2.epochs",            ValueType::UInt,     "300"},
    {"round2.batch_size",        ValueType::UInt,     "64"},
    {"round2.optimizer",         ValueType::Text,     "adam"},
    {"round2.final_lr_fraction", ValueType::Real,     "0.01"},
    {"round2.beta1",             ValueType::Real,     "0.9"},
    {"round2.beta2",             ValueType::Real,     "0.999"},
    {"round2.adam_eps",          ValueType::Real,     "1e-08"},
    {"round2.ambient_count",     ValueType::UInt,     "0"},
    {"round2.mix_fraction",      ValueType::Real,     "0.1"},

    {"thresholds.xi",            ValueType::Real,     "0.0001"},
    {"thresholds.eps",           ValueType::Real,     "0.001"},
    {"thresholds.tau",           ValueType::Real,     "0.03"},
    {"thresholds.rho",           ValueType::Real,     "0.9"},

    {"taylor.half_width",        ValueType::Real,     "0.3"},
    {"taylor.grid",              ValueType::UInt,     "21"},

    {"level_set.count",          ValueType::UInt,     "100000"},
    {"level_set.low",            ValueType::RealList, ""},
    {"level_set.high",           ValueType::RealList, ""},

    {"geometry.gradient_floor",  ValueType::Real,     "1e-08"},

    {"dim_scan.candidates",      ValueType::UIntList, "1,2,3"},
    {"dim_scan.repeats",         ValueType::UInt,     "10"},

    {"sweep.layers",             ValueType::UIntList, "3"},
    {"sweep.widths",             ValueType::UIntList, "4,18,64"},
    {"sweep.sigmas",             ValueType::RealList, "0,0.005,0.01,0.015"},
    {"sweep.repeats",            ValueType::UInt,     "10"},
    {"sweep.threads",            ValueType::UInt,     "0"},

    {"anomaly.quantile",         ValueType::Real,     "0.99"},
    {"anomaly.error_threshold",  ValueType::Real,     "-1"},

    {"interpolate.steps",        ValueType::UInt,     "11"},
    {"chart.lines",              ValueType::UInt,     "5"},
    {"chart.samples",            ValueType::UInt,     "50"},
};
// clang-format on

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> items;
    if (trim(raw).empty()) return items;
    std::string item;
    std::istringstream ss(raw);
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    return items;
}

double parse_real(const std::string& s, const std::string& key) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
        throw SchemaError("config key '" + key + "': '" + s + "' is not a finite number");
    return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("config key '" + key + "': '" + s + "' is not a non-negative integer");
    return v;
}

void flatten(const nlohmann::json& doc, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& [k, v] : doc.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, out);
        } else if (v.is_array()) {
            std::string joined;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw SchemaError("config key '" + key + "': list entries must be numbers");
                joined += (i ? "," : "") + v[i].dump();
            }
            out.emplace_back(key, joined);
        } else if (v.is_string()) {
            out.emplace_back(key, v.get<std::string>());
        } else if (v.is_boolean() || v.is_number()) {
            out.emplace_back(key, v.dump());
        } else {
            throw SchemaError("config key '" + key + "': unsupported value " + v.dump());
        }
    }
}

} // namespace

std::string canonicalize(ValueType type, const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    switch (type) {
    case ValueType::Bool:
        if (s == "true" || s == "1" || s == "yes" || s == "on") return "true";
        if (s == "false" || s == "0" || s == "no" || s == "off") return "false";
        throw SchemaError("config key '" + key + "': '" + s + "' is not a boolean");
    case ValueType::UInt:
        return std::to_string(parse_uint(s, key));
    case ValueType::Real:
        return format_double(parse_real(s, key));
    case ValueType::Text:
        if (s.find('\n') != std::string::npos) throw SchemaError("config key '" + key + "': multi-line value");
        return s;
    case ValueType::UIntList: {
        std::string out;
        for (const auto& item : split_list(s)) out += (out.empty() ? "" : ",") + std::to_string(parse_uint(item, key));
        return out;
    }
    case ValueType::RealList: {
        std::string out;
        for (const auto& item : split_list(s)) out += (out.empty() ? "" : ",") + format_double(parse_real(item, key));
        return out;
    }
    }
    return s;
}

RunConfig::RunConfig() {
    for (const auto& d : kDefaults) values_[d.key] = Entry{d.type, canonicalize(d.type, d.value, d.key)};
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& d : kDefaults) out.emplace_back(d.key);
    std::sort(out.begin(), out.end());
    return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw SchemaError("unknown config key '" + key + "'");
    it->second.value = canonicalize(it->second.type, value, key);
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw SchemaError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw SchemaError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SchemaError(where + "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        try {
            set(key, line.substr(eq + 1));
        } catch (const SchemaError& e) {
            throw SchemaError(where + e.what());
        }
    }
}

void RunConfig::merge_json(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object()) throw SchemaError(origin + ": JSON config must be an object");
    std::vector<std::pair<std::string, std::string>> flat;
    flatten(doc, "", flat);
    for (const auto& [k, v] : flat) {
        try {
            set(k, v);
        } catch (const SchemaError& e) {
            throw SchemaError(origin + ": " + e.what());
        }
    }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(path.string() + ": " + e.what());
        }
        merge_json(doc, path.string());
    } else {
        merge_text(text, path.string());
    }
}

const RunConfig::Entry& RunConfig::entry(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ContractError("unknown config key '" + key + "'");
    return it->second;
}

bool RunConfig::flag(const std::string& key) const { return entry(key).value == "true"; }

std::uint64_t RunConfig::uint(const std::string& key) const { return parse_uint(entry(key).value, key); }

double RunConfig::real(const std::string& key) const { return parse_real(entry(key).value, key); }

const std::string& RunConfig::text(const std::string& key) const { return entry(key).value; }

std::vector<std::uint64_t> RunConfig::uint_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(entry(key).value)) out.push_back(parse_uint(item, key));
    return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(entry(key).value)) out.push_back(parse_real(item, key));
    return out;
}

// The output location does not influence results, so it is left out of the
// echo and the hash.
static bool is_location_key(const std::string& key) { return key == "out_dir"; }

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [k, e] : values_)
        if (!is_location_key(k)) out += k + "=" + e.value + "\n";
    return out;
}

nlohmann::json RunConfig::echo() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, e] : values_) {
        if (is_location_key(k)) continue;
        switch (e.type) {
        case ValueType::Bool: out[k] = flag(k); break;
        case ValueType::UInt: out[k] = uint(k); break;
        case ValueType::Real: out[k] = real(k); break;
        case ValueType::Text: out[k] = e.value; break;
        case ValueType::UIntList: out[k] = uint_list(k); break;
        case ValueType::RealList: out[k] = real_list(k); break;
        }
    }
    return out;
}

std::string RunConfig::hash() const {
    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace gamla::cli
