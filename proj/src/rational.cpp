#include "exist/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace exist {

Rat rat_from_decimal(const std::string& text) {
  std::string s = text;
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    neg = s[i] == '-';
    ++i;
  }
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num(s.substr(i, slash - i));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + text);
    Rat r(num, den);
    return neg ? Rat(-r) : r;
  }
  auto dot = s.find('.');
  BigInt num = 0;
  BigInt den = 1;
  std::string digits;
  if (dot == std::string::npos) {
    digits = s.substr(i);
  } else {
    digits = s.substr(i, dot - i) + s.substr(dot + 1);
    for (size_t k = dot + 1; k < s.size(); ++k) den *= 10;
  }
  if (digits.empty()) throw std::invalid_argument("bad numeric literal: " + text);
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad numeric literal: " + text);
    num = num * 10 + (c - '0');
  }
  Rat r(num, den);
  return neg ? Rat(-r) : r;
}

Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
  if (x == 0.0) return Rat(0);
  int exp2 = 0;
  double m = std::frexp(x, &exp2);  // x = m * 2^exp2, 0.5 <= |m| < 1
  // 53 doublings make the mantissa integral.
  BigInt mant(static_cast<long long>(std::ldexp(m, 53)));
  exp2 -= 53;
  Rat r(mant);
  if (exp2 > 0) {
    r *= Rat(BigInt(1) << exp2);
  } else if (exp2 < 0) {
    r /= Rat(BigInt(1) << (-exp2));
  }
  return r;
}

double rat_to_double(const Rat& x) { return x.convert_to<double>(); }

BigInt rat_floor(const Rat& x) {
  BigInt q = numerator(x) / denominator(x);
  if (x < 0 && q * denominator(x) != numerator(x)) q -= 1;
  return q;
}

BigInt rat_ceil(const Rat& x) { return -rat_floor(Rat(-x)); }

Rat rat_round_digits(const Rat& x, int digits) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rat y = x * scale;
  // Half away from zero.
  BigInt q = y >= 0 ? rat_floor(y + Rat(1, 2)) : rat_ceil(y - Rat(1, 2));
  return Rat(q, scale);
}

std::string rat_to_string(const Rat& x) {
  if (denominator(x) == 1) return numerator(x).str();
  return numerator(x).str() + "/" + denominator(x).str();
}

std::string rat_to_pretty_string(const Rat& x) {
  BigInt den = denominator(x);
  int tens = 0;
  BigInt d = den;
  while (d % 2 == 0) d /= 2, ++tens;
  int fives = 0;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1 || tens + fives > 12) return rat_to_string(x);
  // Scale to a power of ten.
  int k = std::max(tens, fives);
  BigInt scale = 1;
  for (int i = 0; i < k; ++i) scale *= 10;
  BigInt num = numerator(x) * (scale / den);
  if (k == 0) return num.str();
  bool neg = num < 0;
  if (neg) num = -num;
  std::string s = num.str();
  while (static_cast<int>(s.size()) <= k) s.insert(s.begin(), '0');
  s.insert(s.size() - k, ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return neg ? "-" + s : s;
}

}  // namespace exist
