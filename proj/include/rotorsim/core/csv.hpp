#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rotorsim {

/// Numeric CSV table with a single header line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Throws InvalidInput when the column is missing.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in, const std::string& source_name = "<stream>");
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_csv(std::ostream& out, const CsvTable& table);

} // namespace rotorsim
