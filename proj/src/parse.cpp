#include "rdsym/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "rdsym/errors.hpp"

namespace rdsym {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text), pos_(0) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (eat('+'))
        e = e + term();
      else if (eat('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (eat('*'))
        e = e * unary();
      else if (eat('/'))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (eat('-')) return neg(unary());
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (eat('^')) return pow(base, unary());  // right-associative, allows x^-2
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        is_float = true;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;  // 'e' belongs to a following identifier-like token; stop the number here
      }
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty() || tok == ".") fail("malformed number");
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec == std::errc() && p == tok.data() + tok.size()) return num(v);
      return floating(std::strtod(tok.c_str(), nullptr));
    }
    return floating(std::strtod(tok.c_str(), nullptr));
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    int primes = 0;
    while (pos_ < s_.size() && s_[pos_] == '\'') {
      ++primes;
      ++pos_;
    }
    skip_ws();
    bool call = pos_ < s_.size() && s_[pos_] == '(';
    if (primes > 0 && !call) fail("derivative marks require a function application");
    if (call) {
      ++pos_;
      Expr arg = expression();
      if (!eat(')')) fail("expected ')' after function argument");
      if (primes == 0) {
        if (name == "exp") return exp(arg);
        if (name == "ln") return ln(arg);
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "tan") return tan(arg);
        if (name == "tanh") return tanh(arg);
        if (name == "sqrt") return sqrt(arg);
      }
      Symbol f = Symbol::intern(name, SymbolKind::OpaqueFn);
      return primes == 0 ? apply(f, arg) : fderiv(f, primes, arg);
    }
    if (auto s = Symbol::lookup(name)) {
      if (s->kind() == SymbolKind::OpaqueFn) fail("function symbol '" + name + "' used without argument");
      return sym(*s);
    }
    return sym(Symbol::intern(name, SymbolKind::Parameter));
  }

  std::string_view s_;
  std::size_t pos_;
};

}  // namespace

Expr parse(std::string_view text) {
  vars();  // reserved identifiers interned before anything else
  return Parser(text).run();
}

std::string serialize(const Expr& e) { return e.str(); }

}  // namespace rdsym
