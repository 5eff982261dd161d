#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "sokgen/level.hpp"

namespace sokgen {

/// The controllability prompt placed before a level. Either field may be
/// absent for single-condition prompts; annotated corpora always carry both.
struct Annotation {
    std::optional<int> prop_empty_milli;  // thousandths, as rendered
    std::optional<int> solution_len;

    double prop_empty() const { return prop_empty_milli.value_or(0) / 1000.0; }
    bool empty() const { return !prop_empty_milli && !solution_len; }

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline constexpr std::string_view kPropEmptyKey = "prop_empty: ";
inline constexpr std::string_view kSolutionLenKey = "solution_len: ";

/// One line per present field, each terminated by '\n'.
inline std::string render_annotation(const Annotation& a) {
    std::string out;
    if (a.prop_empty_milli) out += std::string(kPropEmptyKey) + format_milli(*a.prop_empty_milli) + "\n";
    if (a.solution_len) out += std::string(kSolutionLenKey) + std::to_string(*a.solution_len) + "\n";
    return out;
}

inline bool is_annotation_line(std::string_view line) {
    return line.starts_with(kPropEmptyKey) || line.starts_with(kSolutionLenKey);
}

namespace detail {

inline std::optional<int> parse_milli(std::string_view s) {
    const auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() || frac.size() > 3) return std::nullopt;
    int w = 0;
    if (std::from_chars(whole.data(), whole.data() + whole.size(), w).ec != std::errc{} || w < 0 || w > 1) {
        return std::nullopt;
    }
    int f = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        f *= 10;
        if (i < frac.size()) {
            if (frac[i] < '0' || frac[i] > '9') return std::nullopt;
            f += frac[i] - '0';
        }
    }
    const int milli = w * 1000 + f;
    if (milli > 1000) return std::nullopt;
    return milli;
}

}  // namespace detail

/// Splits leading annotation lines off `text`. Returns the annotation and
/// the remaining body. Malformed values leave the line in the body.
inline std::pair<Annotation, std::string_view> split_annotation(std::string_view text) {
    Annotation a;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.starts_with(kPropEmptyKey) && !a.prop_empty_milli) {
            auto v = detail::parse_milli(line.substr(kPropEmptyKey.size()));
            if (!v) break;
            a.prop_empty_milli = v;
        } else if (line.starts_with(kSolutionLenKey) && !a.solution_len) {
            auto value = line.substr(kSolutionLenKey.size());
            int n = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
            if (ec != std::errc{} || ptr != value.data() + value.size() || n < 0) break;
            a.solution_len = n;
        } else {
            break;
        }
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    return {a, text};
}

}  // namespace sokgen
