#include "cw_app/output.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "cw/error.hpp"

namespace cw::app {

std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'" +
                                   (ec ? ": " + ec.message() : std::string()));
}

void write_json(const std::filesystem::path& file, const nlohmann::json& value) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + file.string() + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for '" + file.string() + "'");
}

CsvWriter::CsvWriter(const std::filesystem::path& file, std::vector<std::string> header)
    : file_(file), out_(file), columns_(header.size()) {
  if (!out_) throw Error(ErrorKind::io, "cannot open '" + file.string() + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line_ += ',';
    line_ += header[i];
  }
  finish_line();
}

void CsvWriter::finish_line() {
  line_ += '\n';
  out_ << line_;
  line_.clear();
  if (!out_) throw Error(ErrorKind::io, "write failed for '" + file_.string() + "'");
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw Error(ErrorKind::size_mismatch, "csv row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line_ += ',';
    line_ += format_double(values[i]);
  }
  finish_line();
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

void CsvWriter::row(std::string_view label, std::initializer_list<double> values) {
  if (values.size() + 1 != columns_) throw Error(ErrorKind::size_mismatch, "csv row width does not match header");
  line_ += label;
  for (double v : values) {
    line_ += ',';
    line_ += format_double(v);
  }
  finish_line();
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorKind::io, "closing '" + file_.string() + "' failed");
}

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace cw::app
