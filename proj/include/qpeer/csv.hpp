#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace qpeer {

using CsvCell = std::variant<double, std::string>;

// Comma-separated, '.' decimal, LF endings. Numbers print with 17 significant digits unless
// `significant_digits` is set.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out, std::optional<int> significant_digits = std::nullopt)
        : out_(out), digits_(significant_digits.value_or(17))
    {
    }

    void header(const std::vector<std::string>& names);
    void row(const std::vector<CsvCell>& cells);

    std::string format(double v) const;

private:
    std::ostream& out_;
    int digits_;
};

} // namespace qpeer
