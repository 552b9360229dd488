#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fixcalc/error.hpp"

namespace fixcalc::cli {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    for (;;) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        parse_pair(*table);
      }
      expect_line_end();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Config, "line " + std::to_string(line_) + ": " + what);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  char take() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) take();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') take();
    }
  }
  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        take();
      } else {
        return;
      }
    }
  }
  // Whitespace, newlines and comments inside arrays.
  void skip_array_space() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        take();
      } else {
        return;
      }
    }
  }
  void expect_line_end() {
    skip_spaces();
    skip_comment();
    if (at_end()) return;
    if (peek() == '\r') take();
    if (peek() != '\n') fail(std::string("unexpected character '") + peek() + "'");
    take();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!at_end() && bare_char(peek())) take();
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  json& open_table(json& root) {
    take();  // '['
    json* t = &root;
    std::string path;
    for (;;) {
      skip_spaces();
      const std::string key = bare_key();
      path += path.empty() ? key : "." + key;
      json& next = (*t)[key];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("'" + path + "' is already a value");
      t = &next;
      skip_spaces();
      if (peek() == '.') {
        take();
        continue;
      }
      if (peek() != ']') fail("expected ']' in table header");
      take();
      break;
    }
    if (t->contains("__defined__")) fail("table '" + path + "' defined twice");
    (*t)["__defined__"] = true;
    return *t;
  }

  void parse_pair(json& table) {
    const std::string key = bare_key();
    skip_spaces();
    if (peek() != '=') fail("expected '=' after key '" + key + "'");
    take();
    skip_spaces();
    if (table.contains(key)) fail("duplicate key '" + key + "'");
    table[key] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '\'') return literal_string_value();
    if (c == '[') return array_value();
    if (s_.substr(pos_, 4) == "true" && !bare_char(s_.size() > pos_ + 4 ? s_[pos_ + 4] : ' ')) {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false" && !bare_char(s_.size() > pos_ + 5 ? s_[pos_ + 5] : ' ')) {
      pos_ += 5;
      return false;
    }
    return number_value();
  }

  json string_value() {
    take();
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) fail("unterminated string");
      switch (take()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail("unsupported escape in string");
      }
    }
    return out;
  }

  // 'text': no escapes.
  json literal_string_value() {
    take();
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '\'') return out;
      out += c;
    }
  }

  json array_value() {
    take();
    json arr = json::array();
    for (;;) {
      skip_array_space();
      if (peek() == ']') {
        take();
        return arr;
      }
      arr.push_back(value());
      skip_array_space();
      if (peek() == ',') {
        take();
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  json number_value() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                         peek() == '.' || peek() == '_')) {
      take();
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("expected a value");
    std::erase(tok, '_');
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    } else {
      double v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    }
    fail("invalid value '" + tok + "'");
  }
};

void strip_markers(json& j) {
  if (!j.is_object()) return;
  j.erase("__defined__");
  for (auto& [k, v] : j.items()) strip_markers(v);
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  json root = Parser(text).parse();
  strip_markers(root);
  return root;
}

nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace fixcalc::cli
