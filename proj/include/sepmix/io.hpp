// File output helpers: atomic writes and small CSV tables.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sepmix {

// write to <path>.tmp then rename over <path>
void write_atomic(const std::string& path, std::string_view contents);

std::uint64_t fnv1a64(std::string_view s);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row() {
        rows_.emplace_back();
        return *this;
    }
    CsvTable& cell(const std::string& s);
    CsvTable& cell(double v);
    CsvTable& cell(long long v);
    CsvTable& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvTable& cell(std::uint64_t v);

    std::string str() const;
    void save(const std::string& path) const { write_atomic(path, str()); }
    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double v);

}  // namespace sepmix
