#ifndef PRTBW_CSV_HPP
#define PRTBW_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "prtbw/model.hpp"

namespace prtbw {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const;  // -1 when absent
};

// RFC-4180-style reader: quoted fields, embedded commas/quotes/newlines,
// CRLF tolerated. Throws std::runtime_error with file/line context.
CsvTable read_csv(const std::string& path);
CsvTable read_csv_stream(std::istream& in, const std::string& label);

void write_csv(const std::string& path, const CsvTable& table);
std::string csv_quote(const std::string& field);

// Column roles for dataset ingestion. Covariate columns default to every
// column not claimed by a role; an explicit list overrides that.
struct DatasetRoles {
    std::string treatment = "z";
    std::string outcome;     // empty = no outcome column
    std::string population;  // empty = no population indicator
    std::string id;          // empty = no id column
    std::vector<std::string> covariates;  // empty = all remaining columns
};

// Parses and validates; numeric errors name the (row, column) cell.
Dataset parse_dataset(const std::string& path, const DatasetRoles& roles);

}  // namespace prtbw

#endif
