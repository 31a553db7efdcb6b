#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace exist {

using BigInt = boost::multiprecision::cpp_int;
// Exact rational arithmetic for all symbolic work. Doubles appear only on the
// sampling/learning side of module boundaries.
using Rat = boost::multiprecision::cpp_rational;

// Parses "3", "-2", "0.95", ".5", "7/4" into an exact rational.
Rat rat_from_decimal(const std::string& text);

// Exact conversion; every finite double is a dyadic rational.
Rat rat_from_double(double x);

double rat_to_double(const Rat& x);

BigInt rat_floor(const Rat& x);
BigInt rat_ceil(const Rat& x);

// Rounds half away from zero to the given number of decimal digits.
Rat rat_round_digits(const Rat& x, int digits);

// "19/20", "-3", "0" — canonical fraction form.
std::string rat_to_string(const Rat& x);

// Decimal rendering when the denominator is 2^a * 5^b, fraction form otherwise.
std::string rat_to_pretty_string(const Rat& x);

}  // namespace exist
