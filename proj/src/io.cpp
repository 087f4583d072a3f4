#include <lpakit/io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

namespace lpakit {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const Table& table, const std::string& invocation) {
    out << "# invocation: " << invocation << '\n';
    write_row(out, table.header);
    for (const auto& r : table.rows) write_row(out, r);
}

void write_csv_file(const std::string& path, const Table& table, const std::string& invocation) {
    if (path.empty() || path == "-") {
        write_csv(std::cout, table, invocation);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_csv(out, table, invocation);
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

nlohmann::json to_json(const Bifurcation& b, const std::vector<std::string>& state_names) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(b.kind));
    j["param"] = b.alpha;
    nlohmann::json state = nlohmann::json::object();
    for (Eigen::Index i = 0; i < b.x.size(); ++i) {
        const std::string name =
            static_cast<std::size_t>(i) < state_names.size() ? state_names[i] : "x" + std::to_string(i);
        state[name] = b.x[i];
    }
    j["state"] = state;
    if (b.kind == BifurcationKind::Hopf) j["frequency"] = b.frequency;
    j["degenerate"] = b.degenerate;
    return j;
}

nlohmann::json to_json(const PatternMetrics& m, const std::vector<std::string>& variable_names) {
    nlohmann::json j;
    j["classification"] = std::string(to_string(m.classification));
    nlohmann::json amp = nlohmann::json::object();
    for (std::size_t i = 0; i < m.amplitude.size() && i < variable_names.size(); ++i) {
        amp[variable_names[i]] = m.amplitude[i];
    }
    j["amplitude"] = amp;
    if (m.spike) j["spike"] = {{"height", m.spike->height}, {"location", m.spike->location}, {"width", m.spike->width}};
    return j;
}

}  // namespace lpakit
