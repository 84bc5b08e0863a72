#include <charconv>
#include <cmath>
#include <cstring>
#include <string>
#include <system_error>

#include "tinypy/interp.hpp"

namespace tinypy {

// Shortest round-trip decimal rendering with the reference interpreter's
// notation rules: fixed point while the decimal exponent is in (-4, 16],
// scientific otherwise with a sign and at least two exponent digits, and an
// integral value always carries ".0" in fixed form.
std::string format_double(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d < 0 ? "-inf" : "inf";
    if (d == 0.0) return std::signbit(d) ? "-0.0" : "0.0";

    // Shortest digits via to_chars: "d.dddde±xx" or "de±xx".
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::scientific);
    if (res.ec != std::errc()) return "?";
    *res.ptr = '\0';

    const char* p = buf;
    bool negative = *p == '-';
    if (negative) ++p;
    std::string digits;
    digits += *p++;
    if (*p == '.') {
        ++p;
        while (*p && *p != 'e') digits += *p++;
    }
    int exp10 = 0;
    if (*p == 'e') {
        ++p;
        if (*p == '+') ++p;  // from_chars rejects an explicit plus
        std::from_chars(p, buf + sizeof buf, exp10);
    }

    // Position of the decimal point: value = 0.digits * 10^decpt.
    int decpt = exp10 + 1;
    int ndigits = static_cast<int>(digits.size());

    std::string out;
    if (negative) out += '-';
    if (decpt > -4 && decpt <= 16) {
        if (decpt <= 0) {
            out += "0.";
            out.append(-decpt, '0');
            out += digits;
        } else if (decpt >= ndigits) {
            out += digits;
            out.append(decpt - ndigits, '0');
            out += ".0";
        } else {
            out.append(digits, 0, decpt);
            out += '.';
            out.append(digits, decpt, std::string::npos);
        }
    } else {
        out += digits[0];
        if (ndigits > 1) {
            out += '.';
            out.append(digits, 1, std::string::npos);
        }
        int e = decpt - 1;
        out += 'e';
        out += e < 0 ? '-' : '+';
        std::string es = std::to_string(e < 0 ? -e : e);
        if (es.size() < 2) es.insert(es.begin(), '0');
        out += es;
    }
    return out;
}

}  // namespace tinypy
