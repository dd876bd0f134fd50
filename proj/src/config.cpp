#include "gfvi/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "gfvi/functional.hpp"

namespace gfvi {

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid config";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace toml {

double Value::as_number() const {
  if (kind == Kind::Integer) return static_cast<double>(integer);
  if (kind == Kind::Float) return number;
  throw ConfigError({"expected a number"});
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, int line) : text_(text), line_(line) {}

  Value value() {
    skip_ws();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return boolean(true);
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return boolean(false);
    }
    return number();
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError({fmt::format("line {}: {}", line_, what)});
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  static Value boolean(bool b) {
    Value v;
    v.kind = Value::Kind::Boolean;
    v.boolean = b;
    return v;
  }

  Value string() {
    Value v;
    ++pos_;
    for (;;) {
      if (pos_ >= text_.size()) fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        const char e = text_[pos_++];
        if (e == 'n') {
          v.string += '\n';
        } else if (e == 't') {
          v.string += '\t';
        } else if (e == '"' || e == '\\') {
          v.string += e;
        } else {
          fail("unsupported escape");
        }
        continue;
      }
      v.string += c;
    }
    return v;
  }

  Value array() {
    Value v;
    v.kind = Value::Kind::Array;
    ++pos_;
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.array.push_back(value());
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value number() {
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != ']' && text_[end] != ' ' && text_[end] != '\t') {
      ++end;
    }
    std::string token(text_.substr(pos_, end - pos_));
    pos_ = end;
    std::erase(token, '_');
    if (!token.empty() && token[0] == '+') token.erase(0, 1);
    if (token.empty()) fail("missing value");
    Value v;
    const bool is_float = token.find_first_of(".eEin") != std::string::npos;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (is_float) {
      v.kind = Value::Kind::Float;
      const auto [ptr, ec] = std::from_chars(first, last, v.number);
      if (ec != std::errc() || ptr != last) fail("bad number '" + token + "'");
    } else {
      v.kind = Value::Kind::Integer;
      const auto [ptr, ec] = std::from_chars(first, last, v.integer);
      if (ec != std::errc() || ptr != last) fail("bad integer '" + token + "'");
    }
    return v;
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
    } else if (s[i] == '"') {
      in_string = !in_string;
    } else if (s[i] == '#' && !in_string) {
      return s.substr(0, i);
    }
  }
  return s;
}

bool bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

}  // namespace

Document parse(std::string_view text) {
  Document doc;
  Table* current = &doc.root;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    const auto line = trim(strip_comment(text.substr(start, end - start)));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) throw ConfigError({fmt::format("line {}: malformed table header", line_no)});
      const auto name = std::string(trim(line.substr(2, line.size() - 4)));
      if (!bare_key(name)) throw ConfigError({fmt::format("line {}: bad table name", line_no)});
      current = &doc.arrays[name].emplace_back();
      continue;
    }
    if (line.starts_with('[')) {
      if (!line.ends_with(']')) throw ConfigError({fmt::format("line {}: malformed table header", line_no)});
      const auto name = std::string(trim(line.substr(1, line.size() - 2)));
      if (!bare_key(name)) throw ConfigError({fmt::format("line {}: bad table name", line_no)});
      if (doc.tables.contains(name)) throw ConfigError({fmt::format("line {}: table [{}] defined twice", line_no, name)});
      current = &doc.tables[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError({fmt::format("line {}: expected key = value", line_no)});
    const auto key = std::string(trim(line.substr(0, eq)));
    if (!bare_key(key)) throw ConfigError({fmt::format("line {}: bad key '{}'", line_no, key)});
    if (current->contains(key)) throw ConfigError({fmt::format("line {}: duplicate key '{}'", line_no, key)});
    Parser parser(line.substr(eq + 1), line_no);
    auto value = parser.value();
    parser.finish();
    current->emplace(key, std::move(value));
  }
  return doc;
}

}  // namespace toml

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SimulateCoalescent:
      return "simulate-coalescent";
    case ExperimentKind::SimulateGfvi:
      return "simulate-gfvi";
    case ExperimentKind::DualityCheck:
      return "duality-check";
    case ExperimentKind::MarginalCheck:
      return "marginal-check";
    case ExperimentKind::CdiReport:
      return "cdi-report";
    case ExperimentKind::RatesTable:
      break;
  }
  return "rates-table";
}

ExperimentKind experiment_from_string(std::string_view name) {
  for (auto kind : {ExperimentKind::SimulateCoalescent, ExperimentKind::SimulateGfvi, ExperimentKind::DualityCheck,
                    ExperimentKind::MarginalCheck, ExperimentKind::CdiReport, ExperimentKind::RatesTable}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError({"unknown experiment '" + std::string(name) + "'"});
}

namespace {

// Reads typed fields out of a table, collecting violations instead of
// stopping at the first.
class Reader {
 public:
  Reader(const toml::Table& table, std::string scope, std::vector<std::string>& errors)
      : table_(table), scope_(std::move(scope)), errors_(errors) {}

  ~Reader() {
    for (const auto& [key, value] : table_) {
      if (!seen_.contains(key)) errors_.push_back(fmt::format("{}unknown key '{}'", scope_, key));
    }
  }

  const toml::Value* find(const std::string& key) {
    seen_.emplace(key, true);
    const auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      if (v->kind == toml::Value::Kind::Integer || v->kind == toml::Value::Kind::Float) {
        out = v->as_number();
      } else {
        bad(key, "a number");
      }
    }
  }

  template <typename Int>
  bool integer(const std::string& key, Int& out) {
    const auto* v = find(key);
    if (!v) return false;
    if (v->kind != toml::Value::Kind::Integer || v->integer < 0 ||
        static_cast<std::uint64_t>(v->integer) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
      bad(key, "a non-negative integer");
      return false;
    }
    out = static_cast<Int>(v->integer);
    return true;
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (v->kind == toml::Value::Kind::String) {
        out = v->string;
      } else {
        bad(key, "a string");
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != toml::Value::Kind::Array) return bad(key, "an array of numbers");
    out.clear();
    for (const auto& x : v->array) {
      if (x.kind != toml::Value::Kind::Integer && x.kind != toml::Value::Kind::Float) return bad(key, "an array of numbers");
      out.push_back(x.as_number());
    }
  }

  void integers(const std::string& key, std::vector<int>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != toml::Value::Kind::Array) return bad(key, "an array of integers");
    out.clear();
    for (const auto& x : v->array) {
      if (x.kind != toml::Value::Kind::Integer || x.integer < 0 || x.integer > 1'000'000) {
        return bad(key, "an array of integers");
      }
      out.push_back(static_cast<int>(x.integer));
    }
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (v->kind != toml::Value::Kind::Array) return bad(key, "an array of strings");
    out.clear();
    for (const auto& x : v->array) {
      if (x.kind != toml::Value::Kind::String) return bad(key, "an array of strings");
      out.push_back(x.string);
    }
  }

 private:
  void bad(const std::string& key, const char* expected) {
    errors_.push_back(fmt::format("{}'{}' must be {}", scope_, key, expected));
  }

  const toml::Table& table_;
  std::string scope_;
  std::vector<std::string>& errors_;
  std::map<std::string, bool> seen_;
};

std::string number_text(double x) {
  auto s = fmt::format("{}", x);
  if (s.find_first_of(".ein") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + '"';
}

template <typename T, typename F>
std::string array_text(const std::vector<T>& values, F&& render) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += render(values[i]);
  }
  return out + "]";
}

}  // namespace

std::vector<std::string> config_problems(const ExperimentConfig& c) {
  std::vector<std::string> out;
  for (const auto& v : validate(c.measure).violations) out.push_back("measure: " + v);
  for (const auto& v : law_problems(c.law)) out.push_back("law: " + v);
  if (!c.has_seed) out.push_back("seed is mandatory");
  if (c.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) out.push_back("seed must be < 2^63");
  if (c.replicates < 2) out.push_back("replicates must be >= 2");
  if (c.threads < 1) out.push_back("threads must be >= 1");
  if (c.n < 1) out.push_back("n must be >= 1");
  if (c.p < 1) out.push_back("p must be >= 1");
  if (c.experiment == ExperimentKind::MarginalCheck && c.p > 4) out.push_back("marginal-check needs p <= 4");
  if (c.experiment == ExperimentKind::DualityCheck && c.law.kind != InitialLaw::Kind::Discrete) {
    out.push_back("duality-check needs a discrete law");
  }
  if (c.times.empty()) out.push_back("times must be non-empty");
  for (double t : c.times) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      out.push_back("times must be finite and >= 0");
      break;
    }
  }
  if (c.truncation < 2) out.push_back("truncation must be >= 2");
  if (c.max_resolution < 1 || c.max_resolution > 15) out.push_back("max_resolution must be in 1..15");
  for (int r : c.resolutions) {
    if (r < 1) out.push_back("resolutions must be >= 1");
  }
  std::vector<int> arities;
  for (const auto& f : c.functionals) {
    try {
      arities.push_back(MomentFunctional::parse(f).arity());
    } catch (const std::exception& e) {
      out.push_back(e.what());
    }
  }
  if (c.functionals.empty() &&
      (c.experiment == ExperimentKind::DualityCheck || c.experiment == ExperimentKind::SimulateGfvi)) {
    out.push_back("functionals must be non-empty");
  }
  for (const auto& p : c.partitions) {
    try {
      const auto pi = DistinguishedPartition::parse(p);
      for (int a : arities) {
        if (a != pi.bound()) out.push_back("partition " + p + " does not match the arity of every functional");
      }
    } catch (const std::exception& e) {
      out.push_back(e.what());
    }
  }
  if (c.out.empty()) out.push_back("out must be a non-empty path");
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  const auto doc = toml::parse(text);
  std::vector<std::string> errors;
  ExperimentConfig c;
  c.functionals.clear();
  {
    Reader root(doc.root, "", errors);
    std::string name;
    root.string("experiment", name);
    if (name.empty()) {
      errors.push_back("experiment is mandatory");
    } else {
      try {
        c.experiment = experiment_from_string(name);
      } catch (const ConfigError& e) {
        errors.insert(errors.end(), e.violations().begin(), e.violations().end());
      }
    }
    std::int64_t seed = 0;
    if (root.integer("seed", seed)) {
      c.seed = static_cast<std::uint64_t>(seed);
      c.has_seed = true;
    }
    root.integer("replicates", c.replicates);
    root.integer("threads", c.threads);
    root.integer("n", c.n);
    root.integer("p", c.p);
    root.numbers("times", c.times);
    std::vector<std::string> functionals{"poly(0,1)"};
    root.strings("functionals", functionals);
    c.functionals = functionals;
    root.strings("partitions", c.partitions);
    root.integers("resolutions", c.resolutions);
    root.integer("truncation", c.truncation);
    root.integer("max_resolution", c.max_resolution);
    root.string("out", c.out);
  }
  for (const auto& [name, table] : doc.tables) {
    if (name != "measure" && name != "law") errors.push_back("unknown table [" + name + "]");
  }
  for (const auto& [name, tables] : doc.arrays) {
    if (name != "measure.atoms") errors.push_back("unknown table array [[" + name + "]]");
  }
  if (const auto it = doc.tables.find("measure"); it != doc.tables.end()) {
    Reader m(it->second, "measure: ", errors);
    m.number("c0", c.measure.c0);
    m.number("c1", c.measure.c1);
  }
  if (const auto it = doc.arrays.find("measure.atoms"); it != doc.arrays.end()) {
    for (const auto& table : it->second) {
      Reader a(table, "measure.atoms: ", errors);
      Atom atom;
      a.number("weight", atom.weight);
      a.number("s0", atom.mass.s0);
      a.numbers("s", atom.mass.s);
      c.measure.atoms.push_back(std::move(atom));
    }
  }
  if (const auto it = doc.tables.find("law"); it != doc.tables.end()) {
    Reader l(it->second, "law: ", errors);
    std::string kind = "uniform";
    l.string("kind", kind);
    if (kind == "uniform") {
      c.law = InitialLaw::uniform();
    } else if (kind == "distinct") {
      c.law = InitialLaw::distinct_labels();
    } else if (kind == "discrete") {
      c.law.kind = InitialLaw::Kind::Discrete;
      l.numbers("values", c.law.atoms.values);
      l.numbers("weights", c.law.atoms.weights);
    } else {
      errors.push_back("law: kind must be uniform, distinct or discrete");
    }
    if (kind != "discrete") {
      l.find("values");
      l.find("weights");
      if (it->second.contains("values") || it->second.contains("weights")) {
        errors.push_back("law: values and weights apply to the discrete kind only");
      }
    }
  }
  if (errors.empty()) {
    auto more = config_problems(c);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize(const ExperimentConfig& c) {
  std::string out;
  out += fmt::format("experiment = {}\n", quoted(to_string(c.experiment)));
  if (c.has_seed) out += fmt::format("seed = {}\n", c.seed);
  out += fmt::format("replicates = {}\n", c.replicates);
  out += fmt::format("threads = {}\n", c.threads);
  out += fmt::format("n = {}\n", c.n);
  out += fmt::format("p = {}\n", c.p);
  out += fmt::format("times = {}\n", array_text(c.times, number_text));
  out += fmt::format("functionals = {}\n", array_text(c.functionals, quoted));
  out += fmt::format("partitions = {}\n", array_text(c.partitions, quoted));
  out += fmt::format("resolutions = {}\n", array_text(c.resolutions, [](int r) { return std::to_string(r); }));
  out += fmt::format("truncation = {}\n", c.truncation);
  out += fmt::format("max_resolution = {}\n", c.max_resolution);
  out += fmt::format("out = {}\n", quoted(c.out));
  out += fmt::format("\n[measure]\nc0 = {}\nc1 = {}\n", number_text(c.measure.c0), number_text(c.measure.c1));
  for (const auto& a : c.measure.atoms) {
    out += fmt::format("\n[[measure.atoms]]\nweight = {}\ns0 = {}\ns = {}\n", number_text(a.weight),
                       number_text(a.mass.s0), array_text(a.mass.s, number_text));
  }
  out += "\n[law]\n";
  switch (c.law.kind) {
    case InitialLaw::Kind::Uniform:
      out += "kind = \"uniform\"\n";
      break;
    case InitialLaw::Kind::DistinctLabels:
      out += "kind = \"distinct\"\n";
      break;
    case InitialLaw::Kind::Discrete:
      out += fmt::format("kind = \"discrete\"\nvalues = {}\nweights = {}\n", array_text(c.law.atoms.values, number_text),
                         array_text(c.law.atoms.weights, number_text));
      break;
  }
  return out;
}

}  // namespace gfvi
