#pragma once
// Whitespace-token text streams used by the model and checkpoint formats.
// Doubles are written in shortest round-trip form, so save/load is bit-exact.

#include <sstream>
#include <string>
#include <type_traits>
#include <string_view>

#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"

namespace sentilab {

class TokenWriter {
 public:
  TokenWriter& word(std::string_view w) {
    sep();
    out_ << w;
    return *this;
  }
  TokenWriter& number(double v) { return word(format_double(v)); }
  TokenWriter& integer(long long v) { return word(std::to_string(v)); }
  TokenWriter& newline() {
    out_ << '\n';
    fresh_ = true;
    return *this;
  }
  // Length-prefixed so arbitrary text (spaces, newlines) survives.
  TokenWriter& text(std::string_view s) {
    integer(static_cast<long long>(s.size()));
    out_ << ' ' << s;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  void sep() {
    if (!fresh_) out_ << ' ';
    fresh_ = false;
  }
  std::ostringstream out_;
  bool fresh_ = true;
};

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : text_(text) {}
  // A temporary std::string would dangle.
  template <class T, std::enable_if_t<std::is_same_v<T, std::string>, int> = 0>
  explicit TokenReader(T&&) = delete;

  std::string word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    if (start == pos_) throw InputError("unexpected end of model data");
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(std::string_view w) {
    const auto got = word();
    if (got != w) throw InputError("model data: expected '" + std::string(w) + "', found '" + got + "'");
  }

  double number() {
    const auto w = word();
    double v = 0;
    if (!parse_double(w, v)) throw InputError("model data: bad number '" + w + "'");
    return v;
  }

  long long integer() {
    const auto w = word();
    long long v = 0;
    if (!parse_int(w, v)) throw InputError("model data: bad integer '" + w + "'");
    return v;
  }

  std::size_t count() {
    const auto v = integer();
    if (v < 0) throw InputError("model data: negative count");
    return static_cast<std::size_t>(v);
  }

  std::string text() {
    const std::size_t n = count();
    if (pos_ >= text_.size() || text_[pos_] != ' ') throw InputError("model data: malformed text field");
    ++pos_;
    if (pos_ + n > text_.size()) throw InputError("model data: truncated text field");
    std::string s(text_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace sentilab
