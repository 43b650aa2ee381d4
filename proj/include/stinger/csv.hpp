#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stinger::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name, or -1.
    int column(std::string_view name) const;
};

/// Reads a comma-separated UTF-8 file with a header row. Double-quoted
/// fields may contain commas and doubled quotes. A leading BOM is skipped.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

/// Shortest representation that round-trips to the same double.
std::string format_number(double value);

/// Writes `table` to `path`, creating parent directories.
void write(const std::filesystem::path& path, const Table& table);

}  // namespace stinger::csv
