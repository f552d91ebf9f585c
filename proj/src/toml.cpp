#include "dualbound/toml.hpp"

#include <cctype>
#include <stdexcept>

namespace dualbound::minitoml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("toml parse error (line " + std::to_string(line) +
                           "): " + what);
}

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  void skip_ws() {
    while (!done() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) {
      ++pos;
    }
  }
};

Value parse_value(Cursor& c);

Value parse_string(Cursor& c) {
  ++c.pos;  // opening quote
  std::string out;
  while (!c.done() && c.peek() != '"') {
    char ch = c.s[c.pos++];
    if (ch == '\\') {
      if (c.done()) fail(c.line, "dangling escape in string");
      const char esc = c.s[c.pos++];
      switch (esc) {
        case 'n': ch = '\n'; break;
        case 't': ch = '\t'; break;
        case 'r': ch = '\r'; break;
        case '"': ch = '"'; break;
        case '\\': ch = '\\'; break;
        default: fail(c.line, std::string("unsupported escape \\") + esc);
      }
    }
    out.push_back(ch);
  }
  if (c.done()) fail(c.line, "unterminated string");
  ++c.pos;  // closing quote
  Value v;
  v.kind = Value::Kind::string;
  v.str = std::move(out);
  return v;
}

Value parse_array(Cursor& c) {
  ++c.pos;  // '['
  Value v;
  v.kind = Value::Kind::array;
  c.skip_ws();
  while (!c.done() && c.peek() != ']') {
    v.array.push_back(parse_value(c));
    c.skip_ws();
    if (!c.done() && c.peek() == ',') {
      ++c.pos;
      c.skip_ws();
    }
  }
  if (c.done()) fail(c.line, "unterminated array");
  ++c.pos;  // ']'
  return v;
}

Value parse_scalar(Cursor& c) {
  std::size_t end = c.pos;
  while (end < c.s.size() && c.s[end] != ',' && c.s[end] != ']' &&
         c.s[end] != '\n' && c.s[end] != ' ' && c.s[end] != '\t') {
    ++end;
  }
  std::string tok = c.s.substr(c.pos, end - c.pos);
  c.pos = end;
  if (tok.empty()) fail(c.line, "empty value");

  Value v;
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::boolean;
    v.bool_v = (tok == "true");
    return v;
  }
  std::string digits;
  digits.reserve(tok.size());
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (tok[i] == '_') continue;  // TOML digit separators
    digits.push_back(tok[i]);
  }
  const bool looks_float = digits.find_first_of(".eE") != std::string::npos ||
                           digits == "inf" || digits == "-inf" ||
                           digits == "nan";
  try {
    std::size_t used = 0;
    if (looks_float) {
      v.kind = Value::Kind::floating;
      v.float_v = std::stod(digits, &used);
    } else {
      v.kind = Value::Kind::integer;
      v.int_v = std::stoll(digits, &used);
    }
    if (used != digits.size()) fail(c.line, "malformed number '" + tok + "'");
  } catch (const std::logic_error&) {
    fail(c.line, "cannot parse value '" + tok + "'");
  }
  return v;
}

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) fail(c.line, "missing value");
  const char ch = c.peek();
  if (ch == '"') return parse_string(c);
  if (ch == '[') return parse_array(c);
  return parse_scalar(c);
}

// Strips a trailing comment from a physical line, respecting strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

int bracket_depth(const std::string& text) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '"' && (i == 0 || text[i - 1] != '\\')) {
      in_string = !in_string;
    } else if (!in_string) {
      if (text[i] == '[') ++depth;
      if (text[i] == ']') --depth;
    }
  }
  return depth;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

double Value::as_number() const {
  if (kind == Kind::integer) return static_cast<double>(int_v);
  if (kind == Kind::floating) return float_v;
  throw std::runtime_error("toml: value is not a number");
}

const Value* Document::find(const std::string& table,
                            const std::string& key) const {
  const Table* t = &root;
  if (!table.empty()) {
    auto it = tables.find(table);
    if (it == tables.end()) return nullptr;
    t = &it->second;
  }
  auto kit = t->find(key);
  return kit == t->end() ? nullptr : &kit->second;
}

Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = strip_comment(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;

    // Join continuation lines while an array is open.
    while (bracket_depth(line) > 0 && pos <= text.size()) {
      std::size_t next_eol = text.find('\n', pos);
      if (next_eol == std::string::npos) next_eol = text.size();
      line += "\n" + strip_comment(text.substr(pos, next_eol - pos));
      pos = next_eol + 1;
      ++line_no;
    }

    const std::string body = trim(line);
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.size() >= 2 && body[1] == '[') {
        fail(line_no, "arrays of tables are not supported");
      }
      if (body.back() != ']') fail(line_no, "malformed table header");
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (name.empty()) fail(line_no, "empty table name");
      current = &doc.tables[name];
      continue;
    }

    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    for (char ch : key) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' &&
          ch != '-') {
        fail(line_no, "unsupported key '" + key + "'");
      }
    }
    std::string rhs = trim(body.substr(eq + 1));
    Cursor c{rhs, 0, line_no};
    const Value v = parse_value(c);
    c.skip_ws();
    if (!c.done()) fail(line_no, "trailing characters after value");
    (*current)[key] = v;
  }
  return doc;
}

}  // namespace dualbound::minitoml
