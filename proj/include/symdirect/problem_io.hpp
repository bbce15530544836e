#ifndef SYMDIRECT_PROBLEM_IO_HPP
#define SYMDIRECT_PROBLEM_IO_HPP

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "parse.hpp"
#include "problem.hpp"
#include "transform.hpp"

namespace symdirect {

/// Contents of a problem file: the problem and its optional [symmetry].
struct ProblemFile {
  ProblemSpec problem;
  std::optional<TransformFamily> symmetry;
};

namespace detail {

// Values of the sectioned key-value format: quoted strings, bare numbers
// (kept as text for exact conversion) and bracketed lists.
struct FileValue {
  enum class Kind { String, Number, List } kind = Kind::String;
  std::string text;
  std::vector<FileValue> items;
};

class FileValueParser {
 public:
  FileValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  FileValue run() {
    FileValue v = value();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what + " on line", line_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  FileValue value() {
    skip_ws();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    FileValue v;
    if (c == '"') {
      v.kind = FileValue::Kind::String;
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        v.text += text_[pos_++];
      }
      if (pos_ >= text_.size()) fail("unterminated string");
      ++pos_;
      return v;
    }
    if (c == '[') {
      v.kind = FileValue::Kind::List;
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(value());
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']'");
      }
    }
    v.kind = FileValue::Kind::Number;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '-' || text_[pos_] == '+'))
      v.text += text_[pos_++];
    if (v.text.empty()) fail(std::string("unexpected '") + c + "'");
    return v;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct FileEntry {
  FileValue value;
  std::size_t line;
};
using FileSection = std::map<std::string, FileEntry>;

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::map<std::string, FileSection> read_sections(const std::string& text) {
  std::map<std::string, FileSection> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      current = trim(line.substr(1, line.size() - 2));
      if (out.count(current)) throw ParseError("duplicate section [" + current + "]", line_no);
      out[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (current.empty()) throw ParseError("key outside of a section", line_no);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const std::size_t start = line_no;
    while (bracket_balance(value) > 0) {
      if (!std::getline(in, raw)) throw ParseError("unterminated list", start);
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    auto& section = out[current];
    if (section.count(key)) throw ParseError("duplicate key '" + key + "'", start);
    section.emplace(key, FileEntry{FileValueParser(value, start).run(), start});
  }
  return out;
}

inline const FileEntry& require(const FileSection& s, const std::string& key, const std::string& section) {
  auto it = s.find(key);
  if (it == s.end()) throw ParseError("missing key '" + key + "' in [" + section + "]", 0);
  return it->second;
}

inline std::string as_string(const FileEntry& e, const std::string& key) {
  if (e.value.kind != FileValue::Kind::String) throw ParseError("'" + key + "' must be a string", e.line);
  return e.value.text;
}

inline std::vector<std::string> as_string_list(const FileEntry& e, const std::string& key) {
  if (e.value.kind != FileValue::Kind::List) throw ParseError("'" + key + "' must be a list", e.line);
  std::vector<std::string> out;
  for (const auto& item : e.value.items) {
    if (item.kind != FileValue::Kind::String) throw ParseError("'" + key + "' entries must be strings", e.line);
    out.push_back(item.text);
  }
  return out;
}

// Numbers convert exactly; strings are expressions over coefficient symbols.
inline Expr as_scalar(const FileValue& v, const VarSpace& space, std::size_t line) {
  try {
    if (v.kind == FileValue::Kind::Number) return Expr(parse_decimal(v.text));
    if (v.kind == FileValue::Kind::String) return parse(v.text, space);
  } catch (const ParseError& err) {
    throw ParseError(std::string("bad scalar: ") + err.what(), line);
  }
  throw ParseError("expected a number or an expression string", line);
}

inline Expr as_expr(const std::string& text, const VarSpace& space, std::size_t line) {
  try {
    return parse(text, space);
  } catch (const ParseError& err) {
    throw ParseError(std::string("bad expression '") + text + "': " + err.what(), line);
  }
}

inline std::string scalar_text(const Expr& e) {
  if (is_constant(e)) {
    Rational q = e.rational().constant_value();
    if (q.get_den() == 1) return q.get_num().get_str();
    // Exact decimal when the denominator is 2^a 5^b.
    mpz_class d = q.get_den();
    int twos = 0, fives = 0;
    while (d % 2 == 0) d /= 2, ++twos;
    while (d % 5 == 0) d /= 5, ++fives;
    if (d == 1) {
      const int digits = std::max(twos, fives);
      mpz_class scale = 1;
      for (int k = 0; k < digits; ++k) scale *= 10;
      mpz_class scaled = q.get_num() * scale / q.get_den();
      const bool neg = scaled < 0;
      std::string s = mpz_class(abs(scaled)).get_str();
      while (static_cast<int>(s.size()) <= digits) s = "0" + s;
      return std::string(neg ? "-" : "") + s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
    }
  }
  return "\"" + to_string(e) + "\"";
}

inline std::string quoted_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", \"" : "\"") + items[i] + "\"";
  return out + "]";
}

}  // namespace detail

/// Parse and validate a problem file.
inline ProblemFile load_problem(const std::string& text) {
  using namespace detail;
  auto sections = read_sections(text);
  for (const auto& [name, s] : sections)
    if (name != "problem" && name != "symmetry") throw ParseError("unknown section [" + name + "]", 0);
  auto pit = sections.find("problem");
  if (pit == sections.end()) throw ParseError("missing [problem] section", 0);
  const FileSection& ps = pit->second;
  static const std::set<std::string> known{"state", "control", "params", "time", "parameter", "t0", "t1",
                                           "lagrangian", "dynamics", "boundary", "control_set"};
  for (const auto& [key, entry] : ps)
    if (!known.count(key)) throw ParseError("unknown key '" + key + "' in [problem]", entry.line);

  ProblemFile out;
  ProblemSpec& p = out.problem;
  p.space.states = as_string_list(require(ps, "state", "problem"), "state");
  p.space.controls = as_string_list(require(ps, "control", "problem"), "control");
  if (auto it = ps.find("params"); it != ps.end()) {
    auto names = as_string_list(it->second, "params");
    p.space.coefficients.insert(names.begin(), names.end());
  }
  if (auto it = ps.find("time"); it != ps.end()) p.space.time = as_string(it->second, "time");
  if (auto it = ps.find("parameter"); it != ps.end()) p.space.parameter = as_string(it->second, "parameter");
  if (auto it = ps.find("control_set"); it != ps.end()) {
    const std::string set = as_string(it->second, "control_set");
    if (set != "unconstrained") throw ValidationError("only unconstrained controls are supported, got '" + set + "'");
  }
  p.space.validate();

  const auto& t0 = require(ps, "t0", "problem");
  const auto& t1 = require(ps, "t1", "problem");
  p.t0 = as_scalar(t0.value, p.space, t0.line);
  p.t1 = as_scalar(t1.value, p.space, t1.line);
  const auto& lag = require(ps, "lagrangian", "problem");
  p.lagrangian = as_expr(as_string(lag, "lagrangian"), p.space, lag.line);
  const auto& dyn = require(ps, "dynamics", "problem");
  for (const auto& d : as_string_list(dyn, "dynamics")) p.dynamics.push_back(as_expr(d, p.space, dyn.line));

  if (auto it = ps.find("boundary"); it != ps.end()) {
    const auto& e = it->second;
    if (e.value.kind != FileValue::Kind::List) throw ParseError("'boundary' must be a list", e.line);
    for (const auto& triple : e.value.items) {
      if (triple.kind != FileValue::Kind::List || triple.items.size() != 3 ||
          triple.items[0].kind != FileValue::Kind::String || triple.items[1].kind != FileValue::Kind::String)
        throw ParseError("boundary entries must be [\"t0\"|\"t1\", state, value]", e.line);
      BoundaryPin pin;
      const std::string& tag = triple.items[0].text;
      if (tag == "t0") pin.end = Endpoint::Initial;
      else if (tag == "t1") pin.end = Endpoint::Final;
      else throw ParseError("endpoint tag must be \"t0\" or \"t1\"", e.line);
      pin.state = p.space.state_index(triple.items[1].text);
      pin.value = as_scalar(triple.items[2], p.space, e.line);
      p.boundary.push_back(std::move(pin));
    }
  }
  p.validate();

  if (auto sit = sections.find("symmetry"); sit != sections.end()) {
    const FileSection& ss = sit->second;
    static const std::set<std::string> sym_keys{"t_s", "x_s", "u_s", "gauge"};
    for (const auto& [key, entry] : ss)
      if (!sym_keys.count(key)) throw ParseError("unknown key '" + key + "' in [symmetry]", entry.line);
    TransformFamily f;
    if (auto it = ss.find("t_s"); it != ss.end()) f.t_map = as_expr(as_string(it->second, "t_s"), p.space, it->second.line);
    else f.t_map = Expr::symbol(p.space.time);
    const auto& xs = require(ss, "x_s", "symmetry");
    for (const auto& x : as_string_list(xs, "x_s")) f.x_maps.push_back(as_expr(x, p.space, xs.line));
    const auto& us = require(ss, "u_s", "symmetry");
    for (const auto& u : as_string_list(us, "u_s")) f.u_maps.push_back(as_expr(u, p.space, us.line));
    if (auto it = ss.find("gauge"); it != ss.end())
      f.gauge = as_expr(as_string(it->second, "gauge"), p.space, it->second.line);
    validate_family(f, p.space);
    out.symmetry = std::move(f);
  }
  return out;
}

inline ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_problem(buf.str());
}

/// Deterministic serialization; load_problem(print_problem(f)) reproduces f.
inline std::string print_problem(const ProblemFile& file) {
  using namespace detail;
  const ProblemSpec& p = file.problem;
  std::ostringstream os;
  os << "[problem]\n";
  os << "state = " << quoted_list(p.space.states) << "\n";
  os << "control = " << quoted_list(p.space.controls) << "\n";
  if (!p.space.coefficients.empty())
    os << "params = " << quoted_list({p.space.coefficients.begin(), p.space.coefficients.end()}) << "\n";
  if (p.space.time != "t") os << "time = \"" << p.space.time << "\"\n";
  if (p.space.parameter != "s") os << "parameter = \"" << p.space.parameter << "\"\n";
  os << "t0 = " << scalar_text(p.t0) << "\n";
  os << "t1 = " << scalar_text(p.t1) << "\n";
  os << "lagrangian = \"" << to_string(p.lagrangian) << "\"\n";
  std::vector<std::string> dyn;
  for (const auto& d : p.dynamics) dyn.push_back(to_string(d));
  os << "dynamics = " << quoted_list(dyn) << "\n";
  os << "boundary = [";
  for (std::size_t i = 0; i < p.boundary.size(); ++i) {
    const auto& b = p.boundary[i];
    os << (i ? ", " : "") << "[\"" << endpoint_tag(b.end) << "\", \"" << p.space.states[b.state] << "\", "
       << scalar_text(b.value) << "]";
  }
  os << "]\n";
  if (file.symmetry) {
    const auto& f = *file.symmetry;
    os << "\n[symmetry]\n";
    os << "t_s = \"" << to_string(f.t_map) << "\"\n";
    std::vector<std::string> xs, us;
    for (const auto& e : f.x_maps) xs.push_back(to_string(e));
    for (const auto& e : f.u_maps) us.push_back(to_string(e));
    os << "x_s = " << quoted_list(xs) << "\n";
    os << "u_s = " << quoted_list(us) << "\n";
    if (f.gauge) os << "gauge = \"" << to_string(*f.gauge) << "\"\n";
  }
  return os.str();
}

}  // namespace symdirect

#endif
