#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cfcal::csv {

/// In-memory CSV table. Header row is mandatory; rows are ragged-checked on load.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name, or nullopt when the column is absent.
    std::optional<std::size_t> column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Throws std::runtime_error
/// with the offending line number on ragged rows.
Table read_file(const std::string& path);

void write_file(const std::string& path, const Table& table);

std::vector<std::string> split_line(const std::string& line);

}  // namespace cfcal::csv
