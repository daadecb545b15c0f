#include "odescm/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odescm/errors.hpp"

namespace odescm {
namespace {

enum class Tok { identifier, number, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.line = line_no;
    t.column = i + 1;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && is_ident_char(line[j])) ++j;
      t.kind = Tok::identifier;
      t.text = std::string(line.substr(i, j - i));
      i = j;
    } else if (is_digit(c) || (c == '.' && i + 1 < line.size() && is_digit(line[i + 1]))) {
      std::size_t j = i;
      while (j < line.size() && is_digit(line[j])) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (j < line.size() && is_digit(line[j])) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && is_digit(line[k])) {
          while (k < line.size() && is_digit(line[k])) ++k;
          j = k;
        }
      }
      t.kind = Tok::number;
      t.text = std::string(line.substr(i, j - i));
      i = j;
    } else if (std::string_view("=()[],+-*/^").find(c) != std::string_view::npos) {
      t.kind = Tok::punct;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line_no, i + 1);
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Cursor over the tokens of one line.
class Cursor {
 public:
  Cursor(const std::vector<Token>& tokens, std::size_t line, std::size_t line_length)
      : tokens_(tokens), line_(line), end_column_(line_length + 1) {}

  const Token& peek() const {
    static const Token end_token;
    return pos_ < tokens_.size() ? tokens_[pos_] : end_token;
  }
  bool at_end() const { return pos_ >= tokens_.size(); }
  Token next() {
    if (at_end()) fail("unexpected end of line");
    return tokens_[pos_++];
  }
  bool accept(std::string_view punct) {
    if (!at_end() && peek().kind == Tok::punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
  }
  std::string expect_identifier() {
    if (at_end() || peek().kind != Tok::identifier) fail("expected identifier");
    return next().text;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input '" + peek().text + "'");
  }
  [[noreturn]] void fail(const std::string& message) const {
    const std::size_t column = at_end() ? end_column_ : peek().column;
    throw ParseError(message, line_, column);
  }
  std::size_t line() const { return line_; }

 private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t end_column_;
};

double to_double(const Token& t) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + t.text + "'", t.line, t.column);
  }
  return v;
}

double parse_real(Cursor& cur) {
  bool negative = false;
  if (cur.accept("-")) {
    negative = true;
  } else {
    cur.accept("+");
  }
  if (cur.at_end() || cur.peek().kind != Tok::number) cur.fail("expected a real number");
  const double v = to_double(cur.next());
  return negative ? -v : v;
}

double parse_bound(Cursor& cur) {
  bool negative = false;
  if (cur.accept("-")) {
    negative = true;
  } else {
    cur.accept("+");
  }
  if (!cur.at_end() && cur.peek().kind == Tok::identifier && cur.peek().text == "inf") {
    cur.next();
    return negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
  if (cur.at_end() || cur.peek().kind != Tok::number) cur.fail("expected an interval bound");
  const double v = to_double(cur.next());
  return negative ? -v : v;
}

Interval parse_interval(Cursor& cur) {
  Interval iv;
  if (cur.accept("[")) {
    iv.lower_closed = true;
  } else if (cur.accept("(")) {
    iv.lower_closed = false;
  } else {
    cur.fail("expected '[' or '(' to start an interval");
  }
  const Token lower_tok = cur.peek();
  iv.lower = parse_bound(cur);
  cur.expect(",");
  iv.upper = parse_bound(cur);
  if (cur.accept("]")) {
    iv.upper_closed = true;
  } else if (cur.accept(")")) {
    iv.upper_closed = false;
  } else {
    cur.fail("expected ']' or ')' to close an interval");
  }
  if ((std::isinf(iv.lower) && iv.lower_closed) || (std::isinf(iv.upper) && iv.upper_closed)) {
    throw ParseError("infinite interval bounds must be open", lower_tok.line, lower_tok.column);
  }
  if (iv.lower > iv.upper || (iv.lower == iv.upper && !(iv.lower_closed && iv.upper_closed))) {
    throw ParseError("empty interval", lower_tok.line, lower_tok.column);
  }
  return iv;
}

/// Recursive-descent parser for
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ['-'] atom ['^' ['-'] integer]
///   atom   := number | name | '(' expr ')'
class ExprParser {
 public:
  using Resolver = std::function<std::optional<ExprKind>(const std::string&)>;

  ExprParser(Cursor& cur, Resolver resolve) : cur_(cur), resolve_(std::move(resolve)) {}

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (cur_.accept("+")) {
        lhs = Expr::add(lhs, parse_term());
      } else if (cur_.accept("-")) {
        lhs = Expr::subtract(lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

 private:
  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (cur_.accept("*")) {
        lhs = Expr::multiply(lhs, parse_factor());
      } else if (cur_.accept("/")) {
        lhs = Expr::divide(lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    const bool negative = cur_.accept("-");
    Expr base = parse_atom();
    if (cur_.accept("^")) {
      const bool neg_exp = cur_.accept("-");
      if (cur_.at_end() || cur_.peek().kind != Tok::number) cur_.fail("expected an integer exponent");
      const Token t = cur_.next();
      if (!std::all_of(t.text.begin(), t.text.end(), is_digit) || t.text.size() > 6) {
        throw ParseError("exponent must be an integer", t.line, t.column);
      }
      const int n = std::stoi(t.text);
      base = Expr::power(base, neg_exp ? -n : n);
    }
    return negative ? Expr::negate(base) : base;
  }

  Expr parse_atom() {
    if (cur_.accept("(")) {
      Expr inner = parse_expr();
      cur_.expect(")");
      return inner;
    }
    if (cur_.at_end()) cur_.fail("expected an expression");
    const Token& t = cur_.peek();
    if (t.kind == Tok::number) return Expr::constant(to_double(cur_.next()));
    if (t.kind == Tok::identifier) {
      auto kind = resolve_(t.text);
      if (!kind) throw ParseError("unknown identifier '" + t.text + "'", t.line, t.column);
      const std::string name = cur_.next().text;
      return *kind == ExprKind::variable ? Expr::variable(name) : Expr::parameter(name);
    }
    cur_.fail("unexpected token '" + t.text + "'");
  }

  Cursor& cur_;
  Resolver resolve_;
};

struct Located {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct PendingBlock {
  std::string name;
  std::vector<std::string> members;
  Located where;
};

struct PendingDyn {
  std::string coord;
  std::size_t token_index = 0;  // start of the expression
  std::size_t line = 0;
  Located where;
};

bool reserved(const std::string& name) {
  static const std::set<std::string> words = {"inf", "param", "var", "block", "dyn", "init", "in"};
  return words.count(name) > 0;
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  std::vector<std::size_t> line_lengths;
  {
    std::size_t start = 0;
    std::size_t line_no = 1;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(tokenize_line(line, line_no));
      line_lengths.push_back(line.size());
      start = end + 1;
      ++line_no;
    }
  }

  std::map<std::string, std::pair<double, Located>> params;
  std::vector<std::pair<Variable, Located>> vars;
  std::map<std::string, std::size_t> var_index;
  std::vector<PendingBlock> blocks;
  std::vector<PendingDyn> dyns;
  std::map<std::string, std::pair<double, Located>> inits;

  auto declared = [&](const std::string& name) { return params.count(name) || var_index.count(name); };

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto& toks = lines[ln];
    if (toks.empty()) continue;
    Cursor cur(toks, ln + 1, line_lengths[ln]);
    const Token head = cur.next();
    if (head.kind != Tok::identifier) {
      throw ParseError("expected a declaration keyword", head.line, head.column);
    }
    const std::string& kw = head.text;
    if (kw == "param") {
      const Token name_tok = cur.peek();
      const std::string name = cur.expect_identifier();
      if (reserved(name)) throw ParseError("'" + name + "' is a reserved word", name_tok.line, name_tok.column);
      if (declared(name)) {
        throw ParseError("duplicate declaration of '" + name + "'", name_tok.line, name_tok.column);
      }
      cur.expect("=");
      const double v = parse_real(cur);
      cur.expect_end();
      params[name] = {v, {name_tok.line, name_tok.column}};
    } else if (kw == "var") {
      const Token name_tok = cur.peek();
      const std::string name = cur.expect_identifier();
      if (reserved(name)) throw ParseError("'" + name + "' is a reserved word", name_tok.line, name_tok.column);
      if (declared(name)) {
        throw ParseError("duplicate declaration of '" + name + "'", name_tok.line, name_tok.column);
      }
      if (cur.at_end() || cur.peek().text != "in") cur.fail("expected 'in'");
      cur.next();
      Interval iv = parse_interval(cur);
      cur.expect_end();
      var_index[name] = vars.size();
      vars.push_back({Variable{name, iv}, {name_tok.line, name_tok.column}});
    } else if (kw == "block") {
      const Token name_tok = cur.peek();
      PendingBlock b;
      b.name = cur.expect_identifier();
      b.where = {name_tok.line, name_tok.column};
      cur.expect("=");
      cur.expect("(");
      do {
        b.members.push_back(cur.expect_identifier());
      } while (cur.accept(","));
      cur.expect(")");
      cur.expect_end();
      blocks.push_back(std::move(b));
    } else if (kw == "dyn") {
      const Token name_tok = cur.peek();
      PendingDyn d;
      d.coord = cur.expect_identifier();
      d.where = {name_tok.line, name_tok.column};
      d.line = ln;
      cur.expect("=");
      if (cur.at_end()) cur.fail("expected an expression");
      // Expressions are parsed once all declarations are known.
      d.token_index = 3;
      dyns.push_back(std::move(d));
    } else if (kw == "init") {
      const Token name_tok = cur.peek();
      const std::string name = cur.expect_identifier();
      cur.expect("=");
      const double v = parse_real(cur);
      cur.expect_end();
      if (inits.count(name)) {
        throw ParseError("duplicate init for '" + name + "'", name_tok.line, name_tok.column);
      }
      inits[name] = {v, {name_tok.line, name_tok.column}};
    } else {
      throw ParseError("unknown declaration '" + kw + "'", head.line, head.column);
    }
  }

  if (vars.empty()) throw ParseError("model declares no variables", 0, 0);

  // Group coordinates into blocks.
  std::vector<int> block_of(vars.size(), -1);
  std::set<std::string> block_names;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const PendingBlock& pb = blocks[b];
    if (params.count(pb.name)) {
      throw ParseError("duplicate declaration of '" + pb.name + "'", pb.where.line, pb.where.column);
    }
    if (!block_names.insert(pb.name).second) {
      throw ParseError("duplicate declaration of block '" + pb.name + "'", pb.where.line, pb.where.column);
    }
    auto vit = var_index.find(pb.name);
    if (vit != var_index.end() && !(pb.members.size() == 1 && pb.members[0] == pb.name)) {
      throw ParseError("block name '" + pb.name + "' clashes with a variable", pb.where.line, pb.where.column);
    }
    for (const auto& m : pb.members) {
      auto it = var_index.find(m);
      if (it == var_index.end()) {
        throw ParseError("unknown identifier '" + m + "'", pb.where.line, pb.where.column);
      }
      if (block_of[it->second] != -1) {
        throw ParseError("coordinate '" + m + "' appears in more than one block", pb.where.line,
                         pb.where.column);
      }
      block_of[it->second] = static_cast<int>(b);
    }
  }
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (block_of[v] != -1) continue;
    const std::string& name = vars[v].first.name;
    if (block_names.count(name)) {
      throw ParseError("variable '" + name + "' clashes with a block name", vars[v].second.line,
                       vars[v].second.column);
    }
    block_names.insert(name);
    block_of[v] = static_cast<int>(blocks.size());
    blocks.push_back(PendingBlock{name, {name}, vars[v].second});
  }

  // Blocks are ordered by the first declared variable they contain.
  std::vector<std::size_t> first_var(blocks.size(), vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    auto& f = first_var[static_cast<std::size_t>(block_of[v])];
    f = std::min(f, v);
  }
  std::vector<std::size_t> block_order(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) block_order[b] = b;
  std::sort(block_order.begin(), block_order.end(),
            [&](std::size_t a, std::size_t b) { return first_var[a] < first_var[b]; });

  ModelSpec spec;
  Layout& layout = spec.layout;
  for (const auto& [name, value] : params) layout.parameters.push_back({name, value.first});
  std::vector<Located> var_where;
  for (std::size_t b : block_order) {
    Block blk;
    blk.name = blocks[b].name;
    for (const auto& m : blocks[b].members) {
      const auto& [var, where] = vars[var_index.at(m)];
      blk.coordinates.push_back(layout.variables.size());
      layout.variables.push_back(var);
      var_where.push_back(where);
    }
    layout.blocks.push_back(std::move(blk));
  }

  const std::size_t n = layout.variables.size();
  std::vector<std::optional<Expr>> dynamics(n);
  auto resolver = [&layout](const std::string& name) -> std::optional<ExprKind> {
    if (layout.find_variable(name)) return ExprKind::variable;
    if (layout.find_parameter(name)) return ExprKind::parameter;
    return std::nullopt;
  };
  for (const PendingDyn& d : dyns) {
    auto idx = layout.find_variable(d.coord);
    if (!idx) throw ParseError("unknown identifier '" + d.coord + "'", d.where.line, d.where.column);
    if (dynamics[*idx]) {
      throw ParseError("duplicate dyn for '" + d.coord + "'", d.where.line, d.where.column);
    }
    const auto& toks = lines[d.line];
    std::vector<Token> expr_tokens(toks.begin() + static_cast<std::ptrdiff_t>(d.token_index), toks.end());
    Cursor cur(expr_tokens, d.line + 1, line_lengths[d.line]);
    ExprParser parser(cur, resolver);
    Expr e = parser.parse_expr();
    cur.expect_end();
    dynamics[*idx] = std::move(e);
  }
  for (const auto& [name, value] : inits) {
    if (!layout.find_variable(name)) {
      throw ParseError("unknown identifier '" + name + "'", value.second.line, value.second.column);
    }
  }

  spec.dynamics.reserve(n);
  spec.initial.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Variable& var = layout.variables[i];
    if (!dynamics[i]) {
      throw ParseError("missing dyn for coordinate '" + var.name + "'", var_where[i].line, var_where[i].column);
    }
    auto it = inits.find(var.name);
    if (it == inits.end()) {
      throw ParseError("missing init for coordinate '" + var.name + "'", var_where[i].line,
                       var_where[i].column);
    }
    if (!var.domain.contains(it->second.first)) {
      throw ParseError("initial value of '" + var.name + "' lies outside its domain " + var.domain.to_string(),
                       it->second.second.line, it->second.second.column);
    }
    spec.dynamics.push_back(*dynamics[i]);
    spec.initial.push_back(it->second.first);
  }
  return spec;
}

Expr parse_expression(std::string_view text, const Layout& layout) {
  if (text.find('\n') != std::string_view::npos) throw ParseError("expression must be a single line", 1, 1);
  const auto tokens = tokenize_line(text, 1);
  Cursor cur(tokens, 1, text.size());
  ExprParser parser(cur, [&layout](const std::string& name) -> std::optional<ExprKind> {
    if (layout.find_variable(name)) return ExprKind::variable;
    if (layout.find_parameter(name)) return ExprKind::parameter;
    return std::nullopt;
  });
  Expr e = parser.parse_expr();
  cur.expect_end();
  return e;
}

}  // namespace odescm
