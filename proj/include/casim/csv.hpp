#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "casim/errors.hpp"

namespace casim::io {

/// Builds a CSV document in memory and lands it atomically: the bytes go to
/// a temporary sibling first and are renamed into place, so a failed run
/// never leaves a partially written output file.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header)
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << header[i];
        }
        buf_ << '\n';
        columns_ = header.size();
    }

    template <typename... Ts>
    void row(Ts... values)
    {
        std::size_t n = 0;
        ((append(values, n++)), ...);
        if (n != columns_) throw validation_error("CsvWriter: column count mismatch");
        buf_ << '\n';
    }

    void row_values(const std::vector<double>& values)
    {
        if (values.size() != columns_) throw validation_error("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) buf_ << ',';
            format_double(values[i]);
        }
        buf_ << '\n';
    }

    std::string str() const { return buf_.str(); }

private:
    template <typename T>
    void append(const T& v, std::size_t i)
    {
        if (i) buf_ << ',';
        if constexpr (std::is_floating_point_v<T>) format_double(v);
        else buf_ << v;
    }

    void format_double(double v)
    {
        char tmp[40];
        std::snprintf(tmp, sizeof tmp, "%.12g", v);
        buf_ << tmp;
    }

    std::ostringstream buf_;
    std::size_t columns_ = 0;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot open for writing: " + tmp.string());
        out << contents;
        if (!out) throw validation_error("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

} // namespace casim::io
