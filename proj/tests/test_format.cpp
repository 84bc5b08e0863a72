#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "doctest.h"
#include "tinypy/interp.hpp"
#include "tinypy/rng.hpp"

using namespace tinypy;

TEST_CASE("format_value renders ints, bools and floats") {
    CHECK(format_value(Value::from_int(7)) == "7");
    CHECK(format_value(Value::from_int(-3)) == "-3");
    CHECK(format_value(Value::from_int(0)) == "0");
    CHECK(format_value(Value::from_bool(true)) == "True");
    CHECK(format_value(Value::from_bool(false)) == "False");
    CHECK(format_value(Value::from_float(0.5)) == "0.5");
}

// Expected strings captured from the reference interpreter's repr().
TEST_CASE("format_double matches the reference interpreter") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(7.0 / 3.0) == "2.3333333333333335");
    CHECK(format_double(2.0) == "2.0");
    CHECK(format_double(0.0) == "0.0");
    CHECK(format_double(-0.0) == "-0.0");
    CHECK(format_double(1e16) == "1e+16");
    CHECK(format_double(1e15) == "1000000000000000.0");
    CHECK(format_double(1e-5) == "1e-05");
    CHECK(format_double(1e-4) == "0.0001");
    CHECK(format_double(9999999999999998.0) == "9999999999999998.0");
    CHECK(format_double(1.25) == "1.25");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(123456.789) == "123456.789");
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
    CHECK(format_double(5e-324) == "5e-324");
    CHECK(format_double(1.7976931348623157e308) == "1.7976931348623157e+308");
    CHECK(format_double(9.007199254740992e15) == "9007199254740992.0");
    CHECK(format_double(3.14159e17) == "3.14159e+17");
    CHECK(format_double(1.5e-7) == "1.5e-07");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

namespace {

double parse_back(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// Significant digits of the rendered mantissa: strip sign, point, exponent,
// and leading/trailing zeros (neither carries information).
std::string mantissa_digits(const std::string& s) {
    std::string digits;
    for (char c : s) {
        if (c == 'e') break;
        if (c >= '0' && c <= '9') digits += c;
    }
    size_t begin = digits.find_first_not_of('0');
    if (begin == std::string::npos) return "0";
    size_t end = digits.find_last_not_of('0');
    return digits.substr(begin, end - begin + 1);
}

}  // namespace

TEST_CASE("format_double round-trips and is shortest") {
    SplitMix64 rng(0xF0A7);
    int checked = 0;
    while (checked < 10000) {
        uint64_t bits = rng.next();
        double d;
        static_assert(sizeof d == sizeof bits);
        std::memcpy(&d, &bits, sizeof d);
        if (std::isnan(d) || std::isinf(d)) continue;
        ++checked;

        std::string s = format_double(d);
        REQUIRE(parse_back(s) == d);

        // Minimality: no rendering with one digit fewer round-trips.
        std::string digits = mantissa_digits(s);
        if (digits.size() > 1) {
            int prec = static_cast<int>(digits.size()) - 2;  // one digit fewer
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::scientific, prec);
            REQUIRE(res.ec == std::errc());
            *res.ptr = '\0';
            CHECK(parse_back(buf) != d);
        }
    }
}

TEST_CASE("format_double fixed/scientific thresholds") {
    // Fixed form exactly while the decimal point position is in (-4, 16].
    CHECK(format_double(1234567890123456.0) == "1234567890123456.0");   // decpt 16
    CHECK(format_double(12345678901234567.0) == "1.2345678901234568e+16");
    CHECK(format_double(0.001) == "0.001");
    CHECK(format_double(0.0001) == "0.0001");   // decpt -3
    CHECK(format_double(0.00001) == "1e-05");   // decpt -4
    // Exponent always signed, at least two digits.
    CHECK(format_double(1e100) == "1e+100");
    CHECK(format_double(1e-9) == "1e-09");
}
