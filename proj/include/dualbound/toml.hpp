#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dualbound::minitoml {

// Small TOML subset sufficient for experiment configs: comments, [table]
// headers, and key = value pairs where a value is a string, integer, float,
// boolean, or a (possibly nested, possibly multi-line) array.  Anything else
// is rejected with a line-numbered error.
struct Value {
  enum class Kind { string, integer, floating, boolean, array };
  Kind kind = Kind::string;
  std::string str;
  std::int64_t int_v = 0;
  double float_v = 0.0;
  bool bool_v = false;
  std::vector<Value> array;

  bool is_number() const {
    return kind == Kind::integer || kind == Kind::floating;
  }
  double as_number() const;
};

using Table = std::map<std::string, Value>;

struct Document {
  Table root;
  std::map<std::string, Table> tables;

  const Value* find(const std::string& table, const std::string& key) const;
};

Document parse(const std::string& text);

}  // namespace dualbound::minitoml
