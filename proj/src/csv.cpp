#include "prtbw/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace prtbw {

int CsvTable::col(const std::string& name) const {
    for (size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<int>(j);
    return -1;
}

CsvTable read_csv_stream(std::istream& in, const std::string& label) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false, any = false;
    int line = 1;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    char ch;
    while (in.get(ch)) {
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            end_field();
        } else if (ch == '\r') {
            // swallow; the \n (if any) terminates the record
        } else if (ch == '\n') {
            ++line;
            end_record();
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes)
        throw std::runtime_error(label + ": unterminated quoted field at line " +
                                 std::to_string(line));
    if (!field.empty() || !record.empty()) end_record();
    if (!any || records.empty()) throw std::runtime_error(label + ": empty file");

    CsvTable table;
    table.header = records.front();
    if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
        throw std::runtime_error(label + ": missing header row");
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() == 1 && records[i][0].empty()) continue;  // blank line
        if (records[i].size() != table.header.size())
            throw std::runtime_error(label + ": row " + std::to_string(i) + " has " +
                                     std::to_string(records[i].size()) + " fields, expected " +
                                     std::to_string(table.header.size()));
        table.rows.push_back(std::move(records[i]));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv_stream(in, path);
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    auto write_row = [&](const std::vector<std::string>& row) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << csv_quote(row[j]);
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
}

namespace {

double parse_cell(const std::string& s, int row, const std::string& col) {
    size_t pos = 0;
    double v = 0;
    bool bad = s.empty();
    if (!bad) {
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            bad = true;
        }
    }
    if (bad || pos != s.size() || !std::isfinite(v))
        throw std::runtime_error("invalid numeric value '" + s + "' at row " +
                                 std::to_string(row + 1) + ", column '" + col + "'");
    return v;
}

}  // namespace

Dataset parse_dataset(const std::string& path, const DatasetRoles& roles) {
    const CsvTable table = read_csv(path);
    const int zc = table.col(roles.treatment);
    if (zc < 0) throw std::runtime_error("treatment column '" + roles.treatment + "' not found");
    const int yc = roles.outcome.empty() ? -1 : table.col(roles.outcome);
    if (!roles.outcome.empty() && yc < 0)
        throw std::runtime_error("outcome column '" + roles.outcome + "' not found");
    const int rc = roles.population.empty() ? -1 : table.col(roles.population);
    if (!roles.population.empty() && rc < 0)
        throw std::runtime_error("population column '" + roles.population + "' not found");
    const int idc = roles.id.empty() ? -1 : table.col(roles.id);
    if (!roles.id.empty() && idc < 0)
        throw std::runtime_error("id column '" + roles.id + "' not found");

    std::vector<int> xcols;
    if (roles.covariates.empty()) {
        for (int j = 0; j < static_cast<int>(table.header.size()); ++j)
            if (j != zc && j != yc && j != rc && j != idc) xcols.push_back(j);
    } else {
        for (const std::string& name : roles.covariates) {
            const int j = table.col(name);
            if (j < 0) throw std::runtime_error("covariate column '" + name + "' not found");
            xcols.push_back(j);
        }
    }
    if (xcols.empty()) throw std::runtime_error("no covariate columns");

    const int n = static_cast<int>(table.rows.size());
    if (n == 0) throw std::runtime_error(path + ": no data rows");
    Dataset data;
    data.z.resize(n);
    data.X.resize(n, static_cast<int>(xcols.size()));
    if (yc >= 0) data.y = VectorXd(n);
    if (rc >= 0) data.r = VectorXi(n);
    for (int j : xcols) data.covariate_names.push_back(table.header[j]);

    for (int i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        const bool analysis = rc < 0 || row[rc] != "0";
        if (rc >= 0) {
            const double rv = parse_cell(row[rc], i, table.header[rc]);
            if (rv != 0.0 && rv != 1.0)
                throw std::runtime_error("population indicator must be 0/1 at row " +
                                         std::to_string(i + 1));
            (*data.r)(i) = static_cast<int>(rv);
        }
        if (analysis) {
            data.z(i) = static_cast<int>(parse_cell(row[zc], i, table.header[zc]));
            if (yc >= 0) (*data.y)(i) = parse_cell(row[yc], i, table.header[yc]);
        } else {
            // target-population rows may leave z/y blank
            data.z(i) = row[zc].empty() ? 0 : static_cast<int>(parse_cell(row[zc], i, table.header[zc]));
            if (yc >= 0) (*data.y)(i) = row[yc].empty() ? 0.0 : parse_cell(row[yc], i, table.header[yc]);
        }
        for (size_t k = 0; k < xcols.size(); ++k)
            data.X(i, static_cast<int>(k)) = parse_cell(row[xcols[k]], i, table.header[xcols[k]]);
        if (idc >= 0) data.unit_ids.push_back(row[idc]);
    }
    data.validate();
    return data;
}

}  // namespace prtbw
