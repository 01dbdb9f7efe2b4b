#include "rotorsim/core/csv.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rotorsim {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidInput("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const std::size_t i = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
}

CsvTable parse_csv(std::istream& in, const std::string& source_name) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " columns");
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw InvalidInput(source_name + ":" + std::to_string(line_no) +
                                   ": not a number: '" + c + "'");
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw InvalidInput(source_name + ": empty csv");
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    write_csv(out, table);
}

} // namespace rotorsim
