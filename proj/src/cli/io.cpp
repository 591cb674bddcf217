#include "proxama/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "proxama/errors.hpp"

namespace proxama::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::optional<double> parse_number(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return std::nullopt;
  s = s.substr(first, s.find_last_not_of(" \t") - first + 1);
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, bool allow_header) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& cell : split_csv_line(line)) {
      const auto v = parse_number(cell);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (allow_header && rows.empty() && line_no == 1) continue;
      throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric value");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  return rows;
}

// Next whitespace-separated PGM header token, skipping '#' comments.
std::string pgm_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  return data.substr(start, pos - start);
}

long pgm_int(const std::string& data, std::size_t& pos, const std::string& path) {
  const std::string tok = pgm_token(data, pos);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError(path + ": malformed PGM header");
  }
  return v;
}

Image read_pgm(const std::string& path, const std::string& data) {
  std::size_t pos = 0;
  const std::string magic = pgm_token(data, pos);
  const long cols = pgm_int(data, pos, path);
  const long rows = pgm_int(data, pos, path);
  const long maxval = pgm_int(data, pos, path);
  if (cols < 1 || rows < 1 || maxval < 1 || maxval > 65535) {
    throw DataError(path + ": invalid PGM dimensions or maxval");
  }
  Image img{ImageShape{rows, cols}, Vec(rows * cols)};
  const Index n = rows * cols;
  if (magic == "P2") {
    for (Index i = 0; i < n; ++i) {
      const long v = pgm_int(data, pos, path);
      if (v < 0 || v > maxval) throw DataError(path + ": pixel value out of range");
      img.pixels[i] = static_cast<double>(v) / maxval;
    }
  } else {
    ++pos;  // single whitespace after maxval
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    if (data.size() < pos + bytes * n) throw DataError(path + ": truncated PGM data");
    for (Index i = 0; i < n; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos + bytes * i);
      const long v = bytes == 1 ? p[0] : (p[0] << 8) | p[1];
      if (v > maxval) throw DataError(path + ": pixel value out of range");
      img.pixels[i] = static_cast<double>(v) / maxval;
    }
  }
  return img;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("error while writing '" + path + "'");
}

Image read_image(const std::string& path) {
  const std::string data = read_text(path);
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5')) {
    return read_pgm(path, data);
  }
  const auto rows = read_numeric_csv(path, false);
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.front().size());
  Image img{ImageShape{r, c}, Vec(r * c)};
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) img.pixels[i * c + j] = rows[i][j];
  }
  if (!img.pixels.allFinite()) throw DataError(path + ": non-finite pixel value");
  const double lo = img.pixels.minCoeff();
  const double hi = img.pixels.maxCoeff();
  if (lo < 0.0 || hi > 1.0) {
    if (hi > lo) {
      img.pixels = ((img.pixels.array() - lo) / (hi - lo)).matrix();
    } else {
      img.pixels.setZero();
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Image& image) {
  std::string out = "P5\n" + std::to_string(image.shape.cols) + " " +
                    std::to_string(image.shape.rows) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (Index i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_text(path, out);
}

void write_csv_image(const std::string& path, const Image& image) {
  std::string out;
  for (Index i = 0; i < image.shape.rows; ++i) {
    for (Index j = 0; j < image.shape.cols; ++j) {
      if (j > 0) out += ',';
      out += format_number(image.pixels[image.shape.flat(i, j)]);
    }
    out += '\n';
  }
  write_text(path, out);
}

LabeledData read_labeled_csv(const std::string& path) {
  const auto rows = read_numeric_csv(path, true);
  const std::size_t cols = rows.front().size();
  if (cols < 2) throw DataError(path + ": need at least one feature column and a label column");
  LabeledData d{Mat(rows.size(), cols - 1), Vec(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) d.features(i, j) = rows[i][j];
    const double y = rows[i][cols - 1];
    if (y != 1.0 && y != -1.0) {
      throw DataError(path + ": label on data row " + std::to_string(i + 1) + " is not +1 or -1");
    }
    d.labels[i] = y;
  }
  if (!d.features.allFinite()) throw DataError(path + ": non-finite feature value");
  return d;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += "\r\n";
}

void CsvWriter::row(const std::vector<std::optional<double>>& values) {
  if (values.size() != columns_) throw DimensionError("CsvWriter: row width differs from header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) buffer_ += ',';
    if (values[i]) buffer_ += format_number(*values[i]);
  }
  buffer_ += "\r\n";
}

void CsvWriter::close() { write_text(path_, buffer_); }

}  // namespace proxama::io
