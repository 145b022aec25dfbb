#pragma once

// Deterministic text outputs: CSV tables with a '#' metadata header and JSON
// documents with a "meta" block. Numbers use fixed formatting so reruns are
// byte-identical.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqzlab/config.hpp"
#include "sqzlab/error.hpp"

namespace sqz {

struct OutputMeta {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = tool_version;
    std::vector<std::pair<std::string, std::string>> extra;  // e.g. rbw, vbw, averages
};

inline OutputMeta make_meta(const std::string& command, const ScenarioConfig& config) {
    return {command, config_hash(config), config.seed, tool_version, {}};
}

struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    Table& add(std::string name, std::vector<double> values) {
        detail::require(columns.empty() || values.size() == columns.front().size(), ErrorKind::shape_mismatch,
                        "table column " + name + " differs in length");
        names.push_back(std::move(name));
        columns.push_back(std::move(values));
        return *this;
    }
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_csv(const Table& table, const OutputMeta& meta) {
    std::string out;
    out += "# tool: sqzsim " + meta.version + "\n";
    out += "# command: " + meta.command + "\n";
    out += "# config_hash: " + meta.config_hash + "\n";
    out += "# seed: " + std::to_string(meta.seed) + "\n";
    for (const auto& [k, v] : meta.extra) out += "# " + k + ": " + v + "\n";
    for (std::size_t c = 0; c < table.names.size(); ++c) out += (c ? "," : "") + table.names[c];
    out += "\n";
    const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + format_number(table.columns[c][r]);
        out += "\n";
    }
    return out;
}

inline nlohmann::json meta_json(const OutputMeta& meta) {
    nlohmann::json m = {{"tool", "sqzsim"},
                        {"version", meta.version},
                        {"command", meta.command},
                        {"config_hash", meta.config_hash},
                        {"seed", meta.seed}};
    for (const auto& [k, v] : meta.extra) m[k] = v;
    return m;
}

/// JSON number that degrades to null for non-finite values.
inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline std::string format_json(const nlohmann::json& body, const OutputMeta& meta) {
    nlohmann::json doc = body;
    doc["meta"] = meta_json(meta);
    return doc.dump(2) + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sqz
