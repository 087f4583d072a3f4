#pragma once

// CSV tables and JSON records for command output.

#include <lpakit/continuation.hpp>
#include <lpakit/pde.hpp>

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace lpakit {

/// Shortest decimal that round-trips.
std::string format_number(double x);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// "# invocation: ..." line, header row, then rows.
void write_csv(std::ostream& out, const Table& table, const std::string& invocation);
/// Writes to `path`, or to stdout when path is empty or "-".
void write_csv_file(const std::string& path, const Table& table, const std::string& invocation);
void write_json_file(const std::string& path, const nlohmann::json& doc);

nlohmann::json to_json(const Bifurcation& b, const std::vector<std::string>& state_names);
nlohmann::json to_json(const PatternMetrics& m, const std::vector<std::string>& variable_names);

}  // namespace lpakit
