#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sokgen {

enum class Tile : std::uint8_t { Wall, Floor, Player, Box, Goal, BoxOnGoal, PlayerOnGoal };

inline constexpr std::array<Tile, 7> kAllTiles = {Tile::Wall, Tile::Floor,     Tile::Player,      Tile::Box,
                                                  Tile::Goal, Tile::BoxOnGoal, Tile::PlayerOnGoal};

constexpr char to_char(Tile t) noexcept {
    switch (t) {
        case Tile::Wall: return '#';
        case Tile::Floor: return '-';
        case Tile::Player: return '@';
        case Tile::Box: return '$';
        case Tile::Goal: return '.';
        case Tile::BoxOnGoal: return '*';
        case Tile::PlayerOnGoal: return '+';
    }
    return '?';
}

constexpr std::optional<Tile> tile_from_char(char c) noexcept {
    switch (c) {
        case '#': return Tile::Wall;
        case '-': return Tile::Floor;
        case '@': return Tile::Player;
        case '$': return Tile::Box;
        case '.': return Tile::Goal;
        case '*': return Tile::BoxOnGoal;
        case '+': return Tile::PlayerOnGoal;
        default: return std::nullopt;
    }
}

// Only plain floor counts as empty; goal-marked tiles do not.
constexpr bool is_empty(Tile t) noexcept { return t == Tile::Floor; }
constexpr bool has_player(Tile t) noexcept { return t == Tile::Player || t == Tile::PlayerOnGoal; }
constexpr bool has_box(Tile t) noexcept { return t == Tile::Box || t == Tile::BoxOnGoal; }
constexpr bool has_goal(Tile t) noexcept {
    return t == Tile::Goal || t == Tile::BoxOnGoal || t == Tile::PlayerOnGoal;
}

class ParseError : public std::runtime_error {
  public:
    enum class Kind { EmptyInput, UnknownCharacter, RaggedRows };

    ParseError(Kind kind, std::string message, std::size_t row = 0, std::size_t col = 0, char ch = '\0')
        : std::runtime_error(std::move(message)), kind_(kind), row_(row), col_(col), ch_(ch) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }
    char character() const noexcept { return ch_; }

  private:
    Kind kind_;
    std::size_t row_;
    std::size_t col_;
    char ch_;
};

/// A rectangular Sokoban grid stored row-major.
class Level {
  public:
    Level(std::size_t width, std::size_t height, std::vector<Tile> cells) : width_(width), height_(height), cells_(std::move(cells)) {
        if (width_ == 0 || height_ == 0) throw std::invalid_argument("level dimensions must be positive");
        if (cells_.size() != width_ * height_) throw std::invalid_argument("cell count does not match dimensions");
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }

    Tile at(std::size_t row, std::size_t col) const { return cells_[row * width_ + col]; }
    std::span<const Tile> cells() const noexcept { return cells_; }

    friend bool operator==(const Level&, const Level&) = default;

  private:
    std::size_t width_;
    std::size_t height_;
    std::vector<Tile> cells_;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace detail

/// Parses canonical level text. Trailing blank lines and CR characters are
/// ignored; every other character must belong to the seven-tile alphabet.
/// With `pad_with_walls`, shorter rows are right-padded with walls.
inline Level parse_level(std::string_view text, bool pad_with_walls = false) {
    const auto lines = detail::split_lines(text);
    if (lines.empty()) throw ParseError(ParseError::Kind::EmptyInput, "empty level text");

    std::size_t width = 0;
    for (const auto& line : lines) width = std::max(width, line.size());
    if (width == 0) throw ParseError(ParseError::Kind::EmptyInput, "level has no tiles");

    std::vector<Tile> cells;
    cells.reserve(width * lines.size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto line = lines[r];
        for (std::size_t c = 0; c < line.size(); ++c) {
            auto tile = tile_from_char(line[c]);
            if (!tile) {
                throw ParseError(ParseError::Kind::UnknownCharacter,
                                 "unknown character '" + std::string(1, line[c]) + "' at row " + std::to_string(r) +
                                     ", column " + std::to_string(c),
                                 r, c, line[c]);
            }
            cells.push_back(*tile);
        }
        if (line.size() < width) {
            if (!pad_with_walls) {
                throw ParseError(ParseError::Kind::RaggedRows,
                                 "row " + std::to_string(r) + " has " + std::to_string(line.size()) +
                                     " tiles, expected " + std::to_string(width),
                                 r, line.size());
            }
            cells.insert(cells.end(), width - line.size(), Tile::Wall);
        }
    }
    return Level(width, lines.size(), std::move(cells));
}

inline std::optional<Level> try_parse_level(std::string_view text, bool pad_with_walls = false) {
    try {
        return parse_level(text, pad_with_walls);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

/// Rows joined by '\n', no trailing newline.
inline std::string serialize(const Level& level) {
    std::string out;
    out.reserve(level.size() + level.height());
    for (std::size_t r = 0; r < level.height(); ++r) {
        if (r) out.push_back('\n');
        for (std::size_t c = 0; c < level.width(); ++c) out.push_back(to_char(level.at(r, c)));
    }
    return out;
}

struct ValidityReport {
    bool rectangular = false;
    bool chars_valid = false;
    int player_count = 0;
    int box_count = 0;
    int goal_count = 0;
    bool verdict = false;

    friend bool operator==(const ValidityReport&, const ValidityReport&) = default;
};

namespace detail {

inline void count_tile(ValidityReport& report, Tile t) {
    report.player_count += has_player(t);
    report.box_count += has_box(t);
    report.goal_count += has_goal(t);
}

inline void finish(ValidityReport& report) {
    report.verdict = report.rectangular && report.chars_valid && report.player_count == 1 &&
                     report.box_count == report.goal_count && report.box_count > 0;
}

}  // namespace detail

inline ValidityReport validate(const Level& level) {
    ValidityReport report;
    report.rectangular = true;
    report.chars_valid = true;
    for (Tile t : level.cells()) detail::count_tile(report, t);
    detail::finish(report);
    return report;
}

/// Validity of raw text that may not parse; counts cover the recognised characters.
inline ValidityReport validate_text(std::string_view text) {
    ValidityReport report;
    const auto lines = detail::split_lines(text);
    report.rectangular = !lines.empty() && !lines.front().empty();
    report.chars_valid = !lines.empty();
    for (const auto& line : lines) {
        if (line.size() != lines.front().size()) report.rectangular = false;
        for (char ch : line) {
            if (auto t = tile_from_char(ch)) {
                detail::count_tile(report, *t);
            } else {
                report.chars_valid = false;
            }
        }
    }
    detail::finish(report);
    return report;
}

inline std::size_t count_empty(const Level& level) {
    return static_cast<std::size_t>(std::count_if(level.cells().begin(), level.cells().end(), is_empty));
}

inline double prop_empty(const Level& level) {
    return static_cast<double>(count_empty(level)) / static_cast<double>(level.size());
}

/// prop_empty in thousandths, truncated toward zero.
inline int prop_empty_milli(const Level& level) {
    return static_cast<int>(count_empty(level) * 1000 / level.size());
}

/// Renders a thousandths value the way the annotation format expects:
/// "0.25", "0.269", "0.0", "1.0".
inline std::string format_milli(int milli) {
    std::string frac = std::to_string(1000 + milli % 1000).substr(1);
    while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
    return std::to_string(milli / 1000) + "." + frac;
}

inline std::string format_prop_empty(const Level& level) { return format_milli(prop_empty_milli(level)); }

enum class Transform { FlipX, FlipY, Rot90CW, Rot90CCW };

inline constexpr std::array<Transform, 4> kAllTransforms = {Transform::FlipX, Transform::FlipY, Transform::Rot90CW,
                                                            Transform::Rot90CCW};

inline std::string_view to_string(Transform t) {
    switch (t) {
        case Transform::FlipX: return "flip-x";
        case Transform::FlipY: return "flip-y";
        case Transform::Rot90CW: return "rot90-cw";
        case Transform::Rot90CCW: return "rot90-ccw";
    }
    return "?";
}

/// FlipX mirrors across the horizontal axis (row order reversed), FlipY
/// across the vertical axis (column order reversed).
inline Level transform(const Level& level, Transform op) {
    const std::size_t w = level.width();
    const std::size_t h = level.height();
    const bool rotates = op == Transform::Rot90CW || op == Transform::Rot90CCW;
    const std::size_t out_w = rotates ? h : w;
    const std::size_t out_h = rotates ? w : h;
    std::vector<Tile> cells(level.size());
    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            Tile t{};
            switch (op) {
                case Transform::FlipX: t = level.at(h - 1 - r, c); break;
                case Transform::FlipY: t = level.at(r, w - 1 - c); break;
                case Transform::Rot90CW: t = level.at(h - 1 - c, r); break;
                case Transform::Rot90CCW: t = level.at(c, w - 1 - r); break;
            }
            cells[r * out_w + c] = t;
        }
    }
    return Level(out_w, out_h, std::move(cells));
}

}  // namespace sokgen
