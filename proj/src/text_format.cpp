#include "so3fuzzy/text_format.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace so3fuzzy {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(values[i]);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text) {
    const std::string_view t = trim(text);
    // from_chars rejects a leading '+', which people do write by hand.
    const std::string_view digits = (!t.empty() && t.front() == '+') ? t.substr(1) : t;
    double value = 0.0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (t.empty() || res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
        throw std::invalid_argument("not a number: '" + std::string(t) + "'");
    }
    return value;
}

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto start = text.find_first_not_of(" \t\r\n,", pos);
        if (start == std::string_view::npos) break;
        auto end = text.find_first_of(" \t\r\n,", start);
        if (end == std::string_view::npos) end = text.size();
        out.push_back(parse_number(text.substr(start, end - start)));
        pos = end;
    }
    return out;
}

}  // namespace so3fuzzy
