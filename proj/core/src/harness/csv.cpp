#include "fspde/harness/csv.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "fspde/error.hpp"

namespace fspde::harness {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  fail(ErrorKind::Io, "csv has no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& s = rows.at(row).at(column(name));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    fail(ErrorKind::Io, "csv cell '" + s + "' in column '" + name + "' is not a number");
  }
  return v;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << quote(cells[i]);
  }
  os << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) fail(ErrorKind::Io, "unterminated quote in csv line");
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace

std::string to_csv_text(const CsvTable& table) {
  std::ostringstream os;
  os << "# config_hash=" << table.config_hash << '\n';
  for (const auto& [k, v] : table.comments) os << "# " << k << '=' << v << '\n';
  write_line(os, table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      fail(ErrorKind::Io, "csv row has " + std::to_string(row.size()) + " cells, header has " +
                              std::to_string(table.columns.size()));
    }
    write_line(os, row);
  }
  return os.str();
}

void write_csv(const std::filesystem::path& file, const CsvTable& table) {
  const std::string text = to_csv_text(table);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + file.string() + " for writing");
  out << text;
  out.close();
  if (!out) fail(ErrorKind::Io, "failed writing " + file.string());
}

CsvTable parse_csv_text(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorKind::Io, "malformed csv comment: " + line);
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "config_hash") {
        table.config_hash = value;
      } else {
        table.comments.emplace_back(key, value);
      }
      continue;
    }
    if (!header) {
      table.columns = split_line(line);
      header = true;
      continue;
    }
    auto cells = split_line(line);
    if (cells.size() != table.columns.size()) {
      fail(ErrorKind::Io, "csv row width " + std::to_string(cells.size()) +
                              " does not match header width " +
                              std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!header) fail(ErrorKind::Io, "csv has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv_text(ss.str());
}

CsvTable path_table(const Path& path, const std::string& config_hash) {
  CsvTable t;
  t.config_hash = config_hash;
  t.columns.push_back("t");
  for (std::size_t i = 0; i < path.dim(); ++i) t.columns.push_back("v" + std::to_string(i));
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::vector<std::string> row{format_number(path.time(k))};
    for (double v : path.row(k)) row.push_back(format_number(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fspde::harness
