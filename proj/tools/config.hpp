#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "darwin/errors.hpp"

namespace darwin::cli {

using json = nlohmann::json;

/// Malformed or invalid scenario config. `where` is "file:line" when known and
/// `field` a JSON-pointer-like path ("params.particles[1].mass").
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& where, const std::string& field, const std::string& message);

  std::string location;
  std::string field;
};

/// Parsed config text plus the source line of every object key.
class ConfigDocument {
 public:
  /// Throws ConfigError with line and column on a syntax error.
  static ConfigDocument parse(const std::string& text, std::string source);
  static ConfigDocument load(const std::string& path);

  const json& root() const { return root_; }
  const std::string& source() const { return source_; }
  /// "source:line" of a field path, falling back to the nearest enclosing field.
  std::string locate(const std::string& field) const;

 private:
  json root_;
  std::string source_;
  std::map<std::string, int> key_lines_;
};

/// Typed view of one JSON object. Every key read is marked as consumed;
/// finish() rejects the rest, so typos do not pass silently.
class Reader {
 public:
  Reader(const ConfigDocument& doc, const json& node, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  bool is_array(const std::string& key) const;

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  double positive(const std::string& key);
  double positive(const std::string& key, double fallback);
  long long integer(const std::string& key, long long lo, long long hi);
  long long integer(const std::string& key, long long fallback, long long lo, long long hi);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::string choice(const std::string& key, const std::vector<std::string>& options);
  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& options);
  Eigen::Vector3d vec3(const std::string& key);
  Eigen::Vector3i ivec3(const std::string& key);
  std::vector<double> numbers(const std::string& key);

  Reader object(const std::string& key);
  std::optional<Reader> optional_object(const std::string& key);
  std::vector<Reader> objects(const std::string& key);

  void finish() const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const json& require(const std::string& key);
  std::string child(const std::string& key) const;

  const ConfigDocument* doc_;
  const json* node_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace darwin::cli
