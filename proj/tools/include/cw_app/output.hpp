#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cw::app {

// 17 significant digits, scientific.
std::string format_double(double x);

void ensure_directory(const std::filesystem::path& dir);
void write_json(const std::filesystem::path& file, const nlohmann::json& value);

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& file, std::vector<std::string> header);
  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);
  // Leading text cell followed by numbers.
  void row(std::string_view label, std::initializer_list<double> values);
  void close();

private:
  void finish_line();
  std::filesystem::path file_;
  std::ofstream out_;
  std::size_t columns_;
  std::string line_;
};

// Non-finite doubles become null.
nlohmann::json number(double x);

}  // namespace cw::app
