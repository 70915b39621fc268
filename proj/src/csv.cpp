#include "adamlab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "adamlab/errors.hpp"

namespace adamlab {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> fields) {
    if (fields.size() != header_.size())
        throw std::invalid_argument("csv row has " + std::to_string(fields.size()) +
                                    " fields, header has " + std::to_string(header_.size()));
    rows_.push_back(std::move(fields));
}

std::string CsvTable::str() const {
    std::string out;
    auto append = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    };
    append(header_);
    for (const auto& r : rows_) append(r);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::string text = str();
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

} // namespace adamlab
