#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace darwin::cli {

namespace {

std::string compose(const std::string& where, const std::string& field, const std::string& message) {
  std::string out = where;
  if (!field.empty()) out += (out.empty() ? "" : ": ") + std::string("field '") + field + "'";
  return out + (out.empty() ? "" : ": ") + message;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Records the line of every object key, keyed by field path. The text has
// already been accepted by the JSON parser, so only the structure is tracked.
struct KeyIndexer {
  struct Frame {
    bool object;
    std::string path;
    bool expecting_key = true;
    std::string key;
    int index = 0;
  };

  std::map<std::string, int>& lines;
  std::string source;
  std::vector<Frame> stack;

  std::string value_path() const {
    if (stack.empty()) return "";
    const Frame& f = stack.back();
    return f.object ? join(f.path, f.key) : f.path + "[" + std::to_string(f.index) + "]";
  }

  void run(const std::string& text) {
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char ch = text[i];
      if (ch == '\n') {
        ++line;
      } else if (ch == '{' || ch == '[') {
        stack.push_back(Frame{ch == '{', value_path(), true, "", 0});
      } else if (ch == '}' || ch == ']') {
        stack.pop_back();
      } else if (ch == ',') {
        if (stack.back().object)
          stack.back().expecting_key = true;
        else
          ++stack.back().index;
      } else if (ch == ':') {
        stack.back().expecting_key = false;
      } else if (ch == '"') {
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\') ++i;
          s += text[i];
        }
        if (!stack.empty() && stack.back().object && stack.back().expecting_key) {
          stack.back().key = s;
          const std::string p = join(stack.back().path, s);
          if (!lines.emplace(p, line).second)
            throw ConfigError(source + ":" + std::to_string(line), p, "duplicate key");
        }
      }
    }
  }
};

}  // namespace

ConfigError::ConfigError(const std::string& where, const std::string& f, const std::string& message)
    : InvalidArgument(compose(where, f, message)), location(where), field(f) {}

ConfigDocument ConfigDocument::parse(const std::string& text, std::string source) {
  ConfigDocument doc;
  doc.source_ = std::move(source);
  try {
    doc.root_ = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i)
      if (text[i] == '\n') ++line;
    std::string msg = e.what();
    if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(doc.source_ + ":" + std::to_string(line), "", msg);
  }
  KeyIndexer{doc.key_lines_, doc.source_, {}}.run(text);
  if (!doc.root_.is_object()) throw ConfigError(doc.source_ + ":1", "", "top level must be a JSON object");
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "", "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string ConfigDocument::locate(const std::string& field) const {
  std::string f = field;
  while (!f.empty()) {
    if (auto it = key_lines_.find(f); it != key_lines_.end()) return source_ + ":" + std::to_string(it->second);
    const auto cut = f.find_last_of(".[");
    if (cut == std::string::npos) break;
    f.resize(cut);
  }
  return source_;
}

Reader::Reader(const ConfigDocument& doc, const json& node, std::string path)
    : doc_(&doc), node_(&node), path_(std::move(path)) {
  if (!node.is_object()) throw ConfigError(doc.locate(path_), path_, "expected an object");
}

std::string Reader::child(const std::string& key) const { return join(path_, key); }

void Reader::fail(const std::string& key, const std::string& message) const {
  const std::string f = key.empty() ? path_ : child(key);
  throw ConfigError(doc_->locate(f), f, message);
}

bool Reader::has(const std::string& key) const { return node_->contains(key); }

bool Reader::is_array(const std::string& key) const { return has(key) && node_->at(key).is_array(); }

const json& Reader::require(const std::string& key) {
  used_.insert(key);
  if (!node_->contains(key)) fail(key, "required key is missing");
  return node_->at(key);
}

double Reader::number(const std::string& key) {
  const json& v = require(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

double Reader::number(const std::string& key, double fallback) {
  used_.insert(key);
  return has(key) ? number(key) : fallback;
}

double Reader::positive(const std::string& key) {
  const double x = number(key);
  if (!(x > 0.0)) fail(key, "must be positive");
  return x;
}

double Reader::positive(const std::string& key, double fallback) {
  used_.insert(key);
  return has(key) ? positive(key) : fallback;
}

long long Reader::integer(const std::string& key, long long lo, long long hi) {
  const json& v = require(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

long long Reader::integer(const std::string& key, long long fallback, long long lo, long long hi) {
  used_.insert(key);
  return has(key) ? integer(key, lo, hi) : fallback;
}

bool Reader::boolean(const std::string& key, bool fallback) {
  used_.insert(key);
  if (!has(key)) return fallback;
  const json& v = node_->at(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string Reader::string(const std::string& key) {
  const json& v = require(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  return has(key) ? string(key) : fallback;
}

std::string Reader::choice(const std::string& key, const std::vector<std::string>& options) {
  const std::string s = string(key);
  for (const auto& o : options)
    if (o == s) return s;
  std::string list;
  for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
  fail(key, "'" + s + "' is not one of: " + list);
}

std::string Reader::choice(const std::string& key, const std::string& fallback,
                           const std::vector<std::string>& options) {
  used_.insert(key);
  return has(key) ? choice(key, options) : fallback;
}

Eigen::Vector3d Reader::vec3(const std::string& key) {
  const json& v = require(key);
  if (!v.is_array() || v.size() != 3) fail(key, "expected an array of 3 numbers");
  Eigen::Vector3d out;
  for (int a = 0; a < 3; ++a) {
    if (!v[a].is_number() || !std::isfinite(v[a].get<double>())) fail(key, "expected an array of 3 finite numbers");
    out[a] = v[a].get<double>();
  }
  return out;
}

Eigen::Vector3i Reader::ivec3(const std::string& key) {
  const json& v = require(key);
  if (!v.is_array() || v.size() != 3) fail(key, "expected an array of 3 integers");
  Eigen::Vector3i out;
  for (int a = 0; a < 3; ++a) {
    if (!v[a].is_number_integer() || std::llabs(v[a].get<long long>()) > 1000)
      fail(key, "expected an array of 3 integers of magnitude <= 1000");
    out[a] = static_cast<int>(v[a].get<long long>());
  }
  return out;
}

std::vector<double> Reader::numbers(const std::string& key) {
  const json& v = require(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
      fail(key + "[" + std::to_string(i) + "]", "expected a finite number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Reader Reader::object(const std::string& key) { return Reader(*doc_, require(key), child(key)); }

std::optional<Reader> Reader::optional_object(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return std::nullopt;
  return object(key);
}

std::vector<Reader> Reader::objects(const std::string& key) {
  const json& v = require(key);
  if (!v.is_array()) fail(key, "expected an array of objects");
  std::vector<Reader> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(*doc_, v[i], child(key) + "[" + std::to_string(i) + "]");
  return out;
}

void Reader::finish() const {
  for (auto it = node_->begin(); it != node_->end(); ++it)
    if (!used_.count(it.key())) fail(it.key(), "unknown key");
}

}  // namespace darwin::cli
