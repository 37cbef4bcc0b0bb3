#include "deltaflow/parse.hpp"

#include <cctype>

namespace deltaflow {

namespace {

class Parser {
 public:
  Parser(const std::string& text, const Variables& vars) : vars_(vars) {
    for (char ch : text)
      if (!std::isspace(static_cast<unsigned char>(ch))) s_ += ch;
  }

  ZPoly parse() {
    if (s_.empty()) fail("empty polynomial");
    ZPoly r = expr();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw DomainError("polynomial parse error at column " + std::to_string(pos_ + 1) + ": " + msg);
  }
  bool eat(char ch) {
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  ZPoly expr() {
    ZPoly r = term();
    while (pos_ < s_.size()) {
      if (eat('+')) {
        r = r + term();
      } else if (eat('-')) {
        r = r - term();
      } else {
        break;
      }
    }
    return r;
  }

  ZPoly term() {
    ZPoly r = power();
    while (eat('*')) r = r * power();
    return r;
  }

  ZPoly power() {
    if (eat('-')) return -power();
    if (eat('+')) return power();
    ZPoly base = primary();
    if (eat('^')) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a nonnegative integer");
      const std::string digits = s_.substr(start, pos_ - start);
      if (digits.size() > 4) fail("exponent too large");
      base = base.pow(std::stoul(digits));
    }
    return base;
  }

  ZPoly primary() {
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (eat('(')) {
      ZPoly r = expr();
      if (!eat(')')) fail("missing ')'");
      return r;
    }
    const unsigned char ch = static_cast<unsigned char>(s_[pos_]);
    if (std::isdigit(ch)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return ZPoly::constant(vars_, {}, mpz_class(s_.substr(start, pos_ - start)));
    }
    if (std::isalpha(ch)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      // Jet coordinates carry trailing primes: x', x''.
      while (pos_ < s_.size() && s_[pos_] == '\'') ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      auto i = vars_.find(name);
      if (!i) {
        pos_ = start;
        fail("unknown variable " + name);
      }
      return ZPoly::variable(vars_, {}, *i);
    }
    fail("unexpected '" + std::string(1, s_[pos_]) + "'");
  }

  const Variables& vars_;
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

ZPoly parse_polynomial(const std::string& text, const Variables& vars) {
  return Parser(text, vars).parse();
}

ZPoly parse_polynomial(const std::string& text) {
  static const Variables vars{"x1", "x2", "x3", "z1", "z2"};
  return parse_polynomial(text, vars);
}

}  // namespace deltaflow
