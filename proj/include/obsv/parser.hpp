#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obsv/expr.hpp"
#include "obsv/model.hpp"

namespace obsv {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }
  [[nodiscard]] const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

enum class TokenKind { Ident, Integer, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Tokenizer for the model and group languages. `#` starts a comment running to end of line.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && (src[j] == '.' || src[j] == 'e' || src[j] == 'E')) {
        throw ParseError(line, col, "decimal constants are not supported; write a ratio of integers");
      }
      tok.kind = TokenKind::Integer;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      tok.kind = TokenKind::Punct;
      tok.text = "->";
      advance(2);
    } else if (std::string_view("(),;:=+-*/^").find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Punct;
      tok.text = std::string(1, c);
      advance(1);
    } else if (c == '.') {
      throw ParseError(line, col, "decimal constants are not supported; write a ratio of integers");
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(tok));
  }
  out.push_back(Token{TokenKind::End, "", line, col});
  return out;
}

/// Cursor over a token stream with the shared expression grammar:
///   expr  := term (("+"|"-") term)*
///   term  := unary (("*"|"/") unary)*
///   unary := ("-"|"+") unary | power
///   power := atom ("^" exponent)?     exponent := INT ("^" exponent)? | "(" exponent ")"
///   atom  := INT | IDENT | "(" expr ")"
class TokenStream {
 public:
  /// Maps an identifier token to the expression it denotes, or throws.
  using Resolver = std::function<Expr(const Token&)>;

  explicit TokenStream(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  [[nodiscard]] const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = pos_ + ahead;
    return k < toks_.size() ? toks_[k] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[nodiscard]] bool at_end() const { return peek().kind == TokenKind::End; }

  [[nodiscard]] bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Punct && t.text == p;
  }

  const Token& expect_punct(std::string_view p) {
    if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'" + found(peek()));
    return next();
  }

  const Token& expect_ident() {
    if (peek().kind != TokenKind::Ident) fail(peek(), "expected an identifier" + found(peek()));
    return next();
  }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(t.line, t.column, msg); }

  static std::string found(const Token& t) {
    return t.kind == TokenKind::End ? " but reached end of input" : " but found '" + t.text + "'";
  }

  Expr parse_expr(const Resolver& resolve) {
    Expr lhs = parse_term(resolve);
    while (is_punct("+") || is_punct("-")) {
      const bool plus = next().text == "+";
      Expr rhs = parse_term(resolve);
      lhs = plus ? expr::add(lhs, rhs) : expr::sub(lhs, rhs);
    }
    return lhs;
  }

 private:
  Expr parse_term(const Resolver& resolve) {
    Expr lhs = parse_unary(resolve);
    while (is_punct("*") || is_punct("/")) {
      const bool times = next().text == "*";
      Expr rhs = parse_unary(resolve);
      lhs = times ? expr::mul(lhs, rhs) : expr::div(lhs, rhs);
    }
    return lhs;
  }

  Expr parse_unary(const Resolver& resolve) {
    if (is_punct("-")) {
      next();
      return expr::neg(parse_unary(resolve));
    }
    if (is_punct("+")) {
      next();
      return parse_unary(resolve);
    }
    return parse_power(resolve);
  }

  Expr parse_power(const Resolver& resolve) {
    Expr base = parse_atom(resolve);
    if (!is_punct("^")) return base;
    next();
    const Integer k = parse_exponent();
    if (k > 1'000'000) fail(peek(), "exponent too large");
    return expr::pow(base, static_cast<unsigned>(k));
  }

  Integer parse_exponent() {
    Integer k;
    if (is_punct("(")) {
      next();
      k = parse_exponent();
      expect_punct(")");
    } else if (peek().kind == TokenKind::Integer) {
      k = Integer(next().text);
    } else {
      fail(peek(), "exponent must be a nonnegative integer literal" + found(peek()));
    }
    if (is_punct("^")) {
      next();
      const Integer e = parse_exponent();
      if (e > 64) fail(peek(), "exponent too large");
      k = boost::multiprecision::pow(k, static_cast<unsigned>(e));
    }
    return k;
  }

  Expr parse_atom(const Resolver& resolve) {
    const Token& t = peek();
    if (t.kind == TokenKind::Integer) {
      next();
      return expr::constant(Integer(t.text));
    }
    if (t.kind == TokenKind::Ident) {
      next();
      return resolve(t);
    }
    if (is_punct("(")) {
      next();
      Expr e = parse_expr(resolve);
      expect_punct(")");
      return e;
    }
    fail(t, "expected an expression" + found(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

namespace detail {

inline bool is_section_keyword(const std::string& s) {
  return s == "params" || s == "states" || s == "inputs" || s == "outputs";
}

}  // namespace detail

/// Parses the model language:
///   file     := section+ equation+
///   section  := ("params:"|"states:"|"inputs:"|"outputs:") ident ("," ident)* ";"
///   equation := "d(" ident ")" "=" expr ";" | ident "=" expr ";"
/// An `ident = expr;` whose left side is not a declared symbol defines an auxiliary
/// name, usable (inlined) in later equations.
inline Model parse_model(std::string_view text, std::string name = "model") {
  TokenStream ts(tokenize(text));
  Model model;
  model.name = std::move(name);

  std::map<std::string, std::pair<SymbolKind, Token>> declared;
  std::map<std::string, Expr> aux;

  bool any_section = false;
  while (ts.peek().kind == TokenKind::Ident && detail::is_section_keyword(ts.peek().text) && ts.is_punct(":", 1)) {
    const std::string keyword = ts.next().text;
    ts.next();
    const SymbolKind kind = keyword == "params"   ? SymbolKind::Parameter
                            : keyword == "states" ? SymbolKind::State
                            : keyword == "inputs" ? SymbolKind::Input
                                                  : SymbolKind::Output;
    auto& list = kind == SymbolKind::Parameter ? model.parameters
                 : kind == SymbolKind::State   ? model.states
                 : kind == SymbolKind::Input   ? model.inputs
                                               : model.outputs;
    while (true) {
      const Token& id = ts.expect_ident();
      if (declared.count(id.text) != 0) TokenStream::fail(id, "duplicate declaration of '" + id.text + "'");
      declared.emplace(id.text, std::make_pair(kind, id));
      list.push_back(id.text);
      if (ts.is_punct(",")) {
        ts.next();
        continue;
      }
      ts.expect_punct(";");
      break;
    }
    any_section = true;
  }
  if (!any_section) TokenStream::fail(ts.peek(), "expected a declaration section (params:, states:, inputs:, outputs:)");

  const TokenStream::Resolver resolve = [&](const Token& t) -> Expr {
    if (auto it = declared.find(t.text); it != declared.end()) {
      if (it->second.first == SymbolKind::Output) {
        TokenStream::fail(t, "output '" + t.text + "' used in an equation");
      }
      return expr::symbol(t.text);
    }
    if (auto it = aux.find(t.text); it != aux.end()) return it->second;
    TokenStream::fail(t, "undeclared symbol '" + t.text + "'");
  };

  std::map<std::string, Expr> state_eq;
  std::map<std::string, Expr> output_eq;
  while (!ts.at_end()) {
    const Token& head = ts.peek();
    if (head.kind == TokenKind::Ident && detail::is_section_keyword(head.text) && ts.is_punct(":", 1)) {
      TokenStream::fail(head, "declaration section after equations");
    }
    if (head.kind == TokenKind::Ident && head.text == "d" && ts.is_punct("(", 1)) {
      ts.next();
      ts.next();
      const Token id = ts.expect_ident();
      ts.expect_punct(")");
      ts.expect_punct("=");
      auto it = declared.find(id.text);
      if (it == declared.end()) TokenStream::fail(id, "undeclared symbol '" + id.text + "'");
      if (it->second.first != SymbolKind::State) {
        TokenStream::fail(id, "d(" + id.text + ") given but '" + id.text + "' is a " + to_string(it->second.first));
      }
      if (state_eq.count(id.text) != 0) TokenStream::fail(id, "second equation for d(" + id.text + ")");
      state_eq[id.text] = ts.parse_expr(resolve);
      ts.expect_punct(";");
      continue;
    }
    const Token id = ts.expect_ident();
    ts.expect_punct("=");
    if (auto it = declared.find(id.text); it != declared.end()) {
      switch (it->second.first) {
        case SymbolKind::Output:
          if (output_eq.count(id.text) != 0) TokenStream::fail(id, "second equation for output '" + id.text + "'");
          output_eq[id.text] = ts.parse_expr(resolve);
          break;
        case SymbolKind::State: TokenStream::fail(id, "'" + id.text + "' is a state; write d(" + id.text + ") = ...");
        default: TokenStream::fail(id, "cannot assign to " + std::string(to_string(it->second.first)) + " '" + id.text + "'");
      }
    } else {
      if (aux.count(id.text) != 0) TokenStream::fail(id, "duplicate definition of '" + id.text + "'");
      if (id.text == "d") TokenStream::fail(id, "'d' is reserved for derivatives");
      aux[id.text] = ts.parse_expr(resolve);
    }
    ts.expect_punct(";");
  }

  for (const auto& s : model.states) {
    auto it = state_eq.find(s);
    if (it == state_eq.end()) {
      const Token& at = declared.at(s).second;
      throw ParseError(at.line, at.column, "state " + s + " has no d(" + s + ") equation");
    }
    model.state_rhs.push_back(it->second);
  }
  for (const auto& y : model.outputs) {
    auto it = output_eq.find(y);
    if (it == output_eq.end()) {
      const Token& at = declared.at(y).second;
      throw ParseError(at.line, at.column, "output " + y + " has no equation");
    }
    model.output_rhs.push_back(it->second);
  }
  const Token& end = ts.peek();
  if (model.outputs.empty()) throw ParseError(end.line, end.column, "model declares no outputs");
  if (model.states.empty() && model.parameters.empty()) {
    throw ParseError(end.line, end.column, "model declares neither states nor parameters");
  }
  if (model.m() > model.n()) {
    model.warnings.push_back("more outputs (" + std::to_string(model.m()) + ") than states (" + std::to_string(model.n()) + ")");
  }
  return model;
}

}  // namespace obsv
