#include "sepmix/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sepmix/errors.hpp"

namespace sepmix {

void write_atomic(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out)
            throw ConfigError("short write on " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable& CsvTable::cell(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
}
CsvTable& CsvTable::cell(double v) { return cell(format_double(v)); }
CsvTable& CsvTable::cell(long long v) { return cell(std::to_string(v)); }
CsvTable& CsvTable::cell(std::uint64_t v) { return cell(std::to_string(v)); }

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            const std::string& s = cells[i];
            if (s.find_first_of(",\"\n") == std::string::npos) {
                out += s;
                continue;
            }
            out += '"';
            for (char ch : s) {
                if (ch == '"')
                    out += '"';
                out += ch;
            }
            out += '"';
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

}  // namespace sepmix
