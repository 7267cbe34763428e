#pragma once

// Internal helpers for the plain-text artifact formats.

#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <string>
#include <string_view>

#include "relcoh/error.hpp"

namespace relcoh::detail {

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class TokenReader {
 public:
  TokenReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string word() {
    std::string tok;
    if (!(in_ >> tok)) fail("unexpected end of input");
    return tok;
  }

  void expect(std::string_view keyword) {
    std::string tok = word();
    if (tok != keyword)
      fail("expected '" + std::string(keyword) + "', found '" + tok + "'");
  }

  double real() {
    std::string tok = word();
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      // from_chars rejects "inf"/"nan" spellings produced by some writers.
      if (tok == "nan" || tok == "inf" || tok == "-inf")
        return tok == "nan" ? std::numeric_limits<double>::quiet_NaN()
               : tok == "inf" ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      fail("malformed number '" + tok + "'");
    }
    return v;
  }

  std::uint64_t count() {
    std::string tok = word();
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      fail("malformed integer '" + tok + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::parse, what_ + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace relcoh::detail
