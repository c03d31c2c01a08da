#include "mfvar/output.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mfvar {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table row width does not match header");
  }
  rows.push_back(std::move(row));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Guard against a non-C numeric locale.
  for (char& c : s) {
    if (c == ',') c = '.';
  }
  return s;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

void write_json_string(std::ostream& os, const std::string& s) {
  os << '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\r': os << "\\r"; break;
      case '\t': os << "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          os << buf;
        } else {
          os << c;
        }
    }
  }
  os << '"';
}

bool is_scalar_array(const nlohmann::ordered_json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (e.is_structured()) return false;
  }
  return true;
}

void write_value(std::ostream& os, const nlohmann::ordered_json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::null: os << "null"; break;
    case nlohmann::ordered_json::value_t::boolean: os << (j.get<bool>() ? "true" : "false"); break;
    case nlohmann::ordered_json::value_t::number_integer: os << j.get<long long>(); break;
    case nlohmann::ordered_json::value_t::number_unsigned: os << j.get<unsigned long long>(); break;
    case nlohmann::ordered_json::value_t::number_float: {
      const double d = j.get<double>();
      if (std::isfinite(d)) {
        os << format_double(d);
      } else {
        os << "null";
      }
      break;
    }
    case nlohmann::ordered_json::value_t::string: write_json_string(os, j.get<std::string>()); break;
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      // Numeric arrays stay on one line; long grids would be unreadable otherwise.
      if (is_scalar_array(j)) {
        os << '[';
        bool first = true;
        for (const auto& e : j) {
          if (!first) os << ", ";
          first = false;
          write_value(os, e, depth + 1);
        }
        os << ']';
        break;
      }
      os << "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_value(os, e, depth + 1);
      }
      os << '\n' << close_pad << ']';
      break;
    }
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_json_string(os, it.key());
        os << ": ";
        write_value(os, it.value(), depth + 1);
      }
      os << '\n' << close_pad << '}';
      break;
    }
    default: throw std::logic_error("unsupported JSON value");
  }
}

}  // namespace

void write_csv(std::ostream& os, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) os << ',';
    os << csv_field(table.columns[c]);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << csv_field(cell_text(row[c]));
    }
    os << '\n';
  }
}

void write_json(std::ostream& os, const nlohmann::ordered_json& doc) {
  write_value(os, doc, 0);
  os << '\n';
}

}  // namespace mfvar
