#ifndef MFVAR_OUTPUT_HPP
#define MFVAR_OUTPUT_HPP

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mfvar {

/// A CSV cell. Doubles are written with 17 significant digits; non-finite
/// doubles as "nan"/"inf"/"-inf".
using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// "%.17g" with '.' as decimal separator regardless of locale.
std::string format_double(double x);

/// RFC-4180 style: comma separated, fields with ',', '"' or newlines quoted,
/// '\n' line endings, header first.
void write_csv(std::ostream& os, const Table& table);

/// Serializes with object keys in insertion order, doubles with 17
/// significant digits and non-finite doubles as null. Two-space indent.
void write_json(std::ostream& os, const nlohmann::ordered_json& doc);

}  // namespace mfvar

#endif  // MFVAR_OUTPUT_HPP
