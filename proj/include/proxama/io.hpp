#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxama/linop.hpp"
#include "proxama/types.hpp"

namespace proxama::io {

struct Image {
  ImageShape shape;
  Vec pixels;  // row-major, values in [0, 1]
};

/// PGM (P2 or P5, detected from the magic number) or a CSV matrix.
/// PGM values are divided by maxval; CSV values already in [0, 1] are kept,
/// otherwise they are rescaled by (v - min) / (max - min).
/// Throws IoError when unreadable, DataError when malformed.
Image read_image(const std::string& path);

/// Binary PGM with maxval 255; values are clamped to [0, 1] first.
void write_pgm(const std::string& path, const Image& image);

/// CSV matrix, one image row per line, full precision.
void write_csv_image(const std::string& path, const Image& image);

struct LabeledData {
  Mat features;
  Vec labels;
};

/// Rows "x1,...,xd,label" with label in {+1, -1}. A first line that does
/// not parse as numbers is taken as a header. Throws DataError on bad labels
/// or ragged rows.
LabeledData read_labeled_csv(const std::string& path);

/// Full-precision decimal form used by every CSV writer ("%.17g").
std::string format_number(double v);

/// RFC 4180 writer with a fixed header; empty cells for missing values.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<std::optional<double>>& values);
  void close();

 private:
  std::string path_;
  std::size_t columns_;
  std::string buffer_;
};

/// Reads a whole file; throws IoError.
std::string read_text(const std::string& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_text(const std::string& path, const std::string& content);

}  // namespace proxama::io
