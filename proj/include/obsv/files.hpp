#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "obsv/model.hpp"
#include "obsv/parser.hpp"
#include "obsv/symmetry.hpp"

namespace obsv {

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Model named after the file stem.
inline Model load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.stem().string());
}

inline GroupAction load_group(const std::filesystem::path& path, const Model& model) {
  return parse_group(read_text_file(path), model);
}

}  // namespace obsv
