#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace adamlab {

// 17 significant digits, '.' decimal point; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double x);

/// Buffers rows in memory and writes them in one go: header row, '\n' line
/// endings, no quoting (fields never contain commas).
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> fields);
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::string str() const;

    // Throws IoError naming the path.
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace adamlab
