#include "qpeer/csv.hpp"

#include <cmath>
#include <cstdio>

namespace qpeer {

std::string CsvWriter::format(double v) const
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits_, v);
    return buf;
}

void CsvWriter::header(const std::vector<std::string>& names)
{
    for (std::size_t i = 0; i < names.size(); ++i)
        out_ << (i ? "," : "") << names[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out_ << ',';
        if (const auto* d = std::get_if<double>(&cells[i]))
            out_ << format(*d);
        else
            out_ << std::get<std::string>(cells[i]);
    }
    out_ << '\n';
}

} // namespace qpeer
