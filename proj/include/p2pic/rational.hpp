#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>

#include "error.hpp"

namespace p2pic {

using Probability = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Probability ratio(long long num, long long den) { return Probability(num, den); }

inline std::string to_string(const Probability& p) {
    return boost::multiprecision::numerator(p).str() + "/" + boost::multiprecision::denominator(p).str();
}

inline long double to_long_double(const Probability& p) {
    // Split to keep precision for large numerators/denominators.
    BigInt n = boost::multiprecision::numerator(p);
    BigInt d = boost::multiprecision::denominator(p);
    return n.convert_to<long double>() / d.convert_to<long double>();
}

inline double to_double(const Probability& p) { return static_cast<double>(to_long_double(p)); }

// Accepts "a/b", "a" or a decimal like "0.25".
inline Probability parse_probability(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash != std::string::npos)
            return Probability(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
        auto dot = s.find('.');
        if (dot == std::string::npos) return Probability(BigInt(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        BigInt den = 1;
        for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
        if (digits.empty() || digits == "-") digits += "0";
        return Probability(BigInt(digits), den);
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, "cannot parse probability '" + s + "'");
    }
}

inline long double binary_entropy(long double p) {
    if (p <= 0 || p >= 1) return 0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

} // namespace p2pic
