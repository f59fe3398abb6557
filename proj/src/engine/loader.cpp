#include "qsim/engine/loader.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsim/error.hpp"

namespace qsim::engine {

namespace {

using nlohmann::json;

Value json_to_value(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return Value::null();
        case json::value_t::boolean: return Value::boolean(j.get<bool>());
        case json::value_t::number_integer: return Value::int64(j.get<int64_t>());
        case json::value_t::number_unsigned: {
            uint64_t u = j.get<uint64_t>();
            if (u <= static_cast<uint64_t>(INT64_MAX)) return Value::int64(static_cast<int64_t>(u));
            return Value::float64(static_cast<double>(u));
        }
        case json::value_t::number_float: return Value::float64(j.get<double>());
        case json::value_t::string: return Value::string(j.get<std::string>());
        case json::value_t::array: {
            Value::Array arr;
            for (const auto& e : j) arr.push_back(json_to_value(e));
            return Value::array(std::move(arr));
        }
        case json::value_t::object: {
            Value::Map m;
            for (auto it = j.begin(); it != j.end(); ++it) m.emplace(it.key(), json_to_value(it.value()));
            return Value::map(std::move(m));
        }
        default: return Value::null();
    }
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Schema {
    std::vector<ColumnDef> columns;
    size_t partition_size = kDefaultPartitionSize;
};

Schema read_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    Schema schema;
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first, second;
        ls >> first >> second;
        if (first == "@partition_size") {
            schema.partition_size = static_cast<size_t>(std::stoull(second));
            continue;
        }
        auto type = logical_type_from_name(second);
        if (!type) {
            throw Error(ErrorCode::IoError,
                        path.string() + ": unknown type '" + second + "' for column " + first);
        }
        schema.columns.push_back({first, *type});
    }
    if (schema.columns.empty()) {
        throw Error(ErrorCode::IoError, path.string() + ": no columns defined");
    }
    return schema;
}

std::vector<Row> read_jsonl(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::IoError,
                        path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
        }
        Row row;
        row.reserve(schema.columns.size());
        if (j.is_array()) {
            for (const auto& cell : j) row.push_back(json_to_value(cell));
        } else if (j.is_object()) {
            for (const auto& col : schema.columns) {
                auto it = j.find(col.name);
                row.push_back(it == j.end() ? Value::null() : json_to_value(*it));
            }
        } else {
            throw Error(ErrorCode::IoError,
                        path.string() + ":" + std::to_string(lineno) + ": expected object or array");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Minimal CSV: no header, '"' quoting with '""' escape, ',' separator.
std::vector<Row> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Row row;
        std::string cell;
        bool quoted_cell = false;
        size_t i = 0;
        auto flush = [&]() {
            if (cell.empty() && !quoted_cell) {
                row.push_back(Value::null());
            } else {
                row.push_back(Value::string(cell));
            }
            cell.clear();
            quoted_cell = false;
        };
        while (i < line.size()) {
            char c = line[i];
            if (c == '"') {
                quoted_cell = true;
                ++i;
                while (i < line.size()) {
                    if (line[i] == '"') {
                        if (i + 1 < line.size() && line[i + 1] == '"') {
                            cell.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    cell.push_back(line[i++]);
                }
            } else if (c == ',') {
                flush();
                ++i;
            } else {
                cell.push_back(c);
                ++i;
            }
        }
        flush();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

void load_data_dir(ReferenceEngine& engine, const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw Error(ErrorCode::IoError, "data directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> schemas;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".schema") schemas.push_back(entry.path());
    }
    std::sort(schemas.begin(), schemas.end());
    for (const auto& schema_path : schemas) {
        Schema schema = read_schema(schema_path);
        std::string table = schema_path.stem().string();
        std::filesystem::path jsonl = schema_path.parent_path() / (table + ".jsonl");
        std::filesystem::path csv = schema_path.parent_path() / (table + ".csv");
        std::vector<Row> rows;
        if (std::filesystem::exists(jsonl)) {
            rows = read_jsonl(jsonl, schema);
        } else if (std::filesystem::exists(csv)) {
            rows = read_csv(csv);
        } else {
            throw Error(ErrorCode::IoError, "no data file for table " + table);
        }
        engine.load_table(table, schema.columns, std::move(rows), schema.partition_size);
    }
}

} // namespace qsim::engine
