#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sokgen/level.hpp"

namespace sokgen {

enum class Move : std::uint8_t { Up, Down, Left, Right };

inline constexpr std::array<Move, 4> kMoveOrder = {Move::Up, Move::Down, Move::Left, Move::Right};

constexpr int row_delta(Move m) noexcept { return m == Move::Up ? -1 : m == Move::Down ? 1 : 0; }
constexpr int col_delta(Move m) noexcept { return m == Move::Left ? -1 : m == Move::Right ? 1 : 0; }

/// LURD notation: lowercase for a walk, uppercase for a push.
inline std::string to_lurd(std::span<const Move> moves, std::span<const bool> pushes = {}) {
    static constexpr char kWalk[] = {'u', 'd', 'l', 'r'};
    std::string out;
    out.reserve(moves.size());
    for (std::size_t i = 0; i < moves.size(); ++i) {
        char ch = kWalk[static_cast<int>(moves[i])];
        if (i < pushes.size() && pushes[i]) ch = static_cast<char>(ch - 'a' + 'A');
        out.push_back(ch);
    }
    return out;
}

struct Cell {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Player position plus the sorted box positions.
struct SearchState {
    Cell player;
    std::vector<Cell> boxes;
    friend bool operator==(const SearchState&, const SearchState&) = default;
};

enum class SolveStatus { Solved, ExhaustedBudget, ProvedUnsolvable, Invalid };

inline std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::ExhaustedBudget: return "exhausted_budget";
        case SolveStatus::ProvedUnsolvable: return "proved_unsolvable";
        case SolveStatus::Invalid: return "invalid";
    }
    return "?";
}

inline std::optional<SolveStatus> solve_status_from_string(std::string_view s) {
    for (auto status : {SolveStatus::Solved, SolveStatus::ExhaustedBudget, SolveStatus::ProvedUnsolvable,
                        SolveStatus::Invalid}) {
        if (to_string(status) == s) return status;
    }
    return std::nullopt;
}

struct SolverConfig {
    long budget = 150000;  // node expansions
    bool deadlock_pruning = true;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Invalid;
    std::vector<Move> moves;
    std::optional<int> solution_len;
    std::optional<int> pushes;
    long nodes_expanded = 0;
    std::string reason;  // set for Invalid
};

inline SearchState initial_state(const Level& level) {
    SearchState s;
    for (std::size_t r = 0; r < level.height(); ++r) {
        for (std::size_t c = 0; c < level.width(); ++c) {
            const Tile t = level.at(r, c);
            const Cell cell{static_cast<int>(r), static_cast<int>(c)};
            if (has_player(t)) s.player = cell;
            if (has_box(t)) s.boxes.push_back(cell);
        }
    }
    return s;
}

namespace detail {

/// Static board facts with cells addressed by a flat index.
class Board {
  public:
    explicit Board(const Level& level)
        : width_(static_cast<int>(level.width())), height_(static_cast<int>(level.height())) {
        const auto n = level.size();
        wall_.resize(n);
        goal_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Tile t = level.cells()[i];
            wall_[i] = t == Tile::Wall;
            goal_[i] = has_goal(t);
            if (goal_[i]) goals_.push_back(static_cast<int>(i));
        }
        nearest_goal_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = std::numeric_limits<int>::max();
            for (int g : goals_) {
                best = std::min(best, std::abs(row(static_cast<int>(i)) - row(g)) +
                                          std::abs(col(static_cast<int>(i)) - col(g)));
            }
            nearest_goal_[i] = goals_.empty() ? 0 : best;
        }
    }

    int width() const { return width_; }
    int row(int idx) const { return idx / width_; }
    int col(int idx) const { return idx % width_; }
    int index(Cell c) const { return c.row * width_ + c.col; }
    Cell cell(int idx) const { return {row(idx), col(idx)}; }
    bool goal(int idx) const { return goal_[static_cast<std::size_t>(idx)]; }

    // Off-board counts as wall.
    bool wall_at(int r, int c) const {
        if (r < 0 || c < 0 || r >= height_ || c >= width_) return true;
        return wall_[static_cast<std::size_t>(r * width_ + c)];
    }

    /// Neighbour in direction m, or -1 when off the board.
    int step(int idx, Move m) const {
        const int r = row(idx) + row_delta(m);
        const int c = col(idx) + col_delta(m);
        if (r < 0 || c < 0 || r >= height_ || c >= width_) return -1;
        return r * width_ + c;
    }

    bool corner_dead(int idx) const {
        if (goal(idx)) return false;
        const int r = row(idx), c = col(idx);
        const bool vertical = wall_at(r - 1, c) || wall_at(r + 1, c);
        const bool horizontal = wall_at(r, c - 1) || wall_at(r, c + 1);
        return vertical && horizontal;
    }

    int box_distance(int idx) const { return nearest_goal_[static_cast<std::size_t>(idx)]; }

  private:
    int width_;
    int height_;
    std::vector<bool> wall_;
    std::vector<bool> goal_;
    std::vector<int> goals_;
    std::vector<int> nearest_goal_;
};

/// Flat arena of states (player followed by sorted boxes) with an
/// open-addressing index for closed-set lookups.
class StateTable {
  public:
    explicit StateTable(std::size_t stride) : stride_(stride), slots_(1024, -1) {}

    std::size_t size() const { return count_; }
    std::span<const std::uint16_t> get(std::int32_t id) const {
        return {arena_.data() + static_cast<std::size_t>(id) * stride_, stride_};
    }

    /// Returns (id, inserted).
    std::pair<std::int32_t, bool> insert(std::span<const std::uint16_t> key) {
        if ((count_ + 1) * 2 > slots_.size()) grow();
        std::size_t slot = probe(key);
        if (slots_[slot] >= 0) return {slots_[slot], false};
        const auto id = static_cast<std::int32_t>(count_++);
        arena_.insert(arena_.end(), key.begin(), key.end());
        slots_[slot] = id;
        return {id, true};
    }

  private:
    static std::uint64_t hash(std::span<const std::uint16_t> key) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto v : key) {
            h ^= v;
            h *= 0x100000001b3ULL;
        }
        return h ^ (h >> 29);
    }

    std::size_t probe(std::span<const std::uint16_t> key) const {
        const std::size_t mask = slots_.size() - 1;
        std::size_t slot = hash(key) & mask;
        while (slots_[slot] >= 0) {
            auto stored = get(slots_[slot]);
            if (std::equal(stored.begin(), stored.end(), key.begin())) break;
            slot = (slot + 1) & mask;
        }
        return slot;
    }

    void grow() {
        std::vector<std::int32_t> old(slots_.size() * 2, -1);
        std::swap(old, slots_);
        for (std::size_t id = 0; id < count_; ++id) {
            slots_[probe(get(static_cast<std::int32_t>(id)))] = static_cast<std::int32_t>(id);
        }
    }

    std::size_t stride_;
    std::size_t count_ = 0;
    std::vector<std::uint16_t> arena_;
    std::vector<std::int32_t> slots_;
};

}  // namespace detail

/// Sum over boxes of the Manhattan distance to the nearest goal.
inline int heuristic(const SearchState& state, const Level& level) {
    const detail::Board board(level);
    int h = 0;
    for (const Cell& b : state.boxes) h += board.box_distance(board.index(b));
    return h;
}

/// Corner deadlock: some box off-goal with a wall on one vertical and one
/// horizontal side.
inline bool is_dead(const SearchState& state, const Level& level) {
    const detail::Board board(level);
    return std::any_of(state.boxes.begin(), state.boxes.end(),
                       [&](const Cell& b) { return board.corner_dead(board.index(b)); });
}

/// Applies moves from the level's initial position. Returns the final state,
/// or nullopt if some move is illegal.
inline std::optional<SearchState> replay(const Level& level, std::span<const Move> moves) {
    SearchState s = initial_state(level);
    const detail::Board board(level);
    for (Move m : moves) {
        const Cell next{s.player.row + row_delta(m), s.player.col + col_delta(m)};
        if (board.wall_at(next.row, next.col)) return std::nullopt;
        auto box = std::find(s.boxes.begin(), s.boxes.end(), next);
        if (box != s.boxes.end()) {
            const Cell beyond{next.row + row_delta(m), next.col + col_delta(m)};
            if (board.wall_at(beyond.row, beyond.col) ||
                std::find(s.boxes.begin(), s.boxes.end(), beyond) != s.boxes.end()) {
                return std::nullopt;
            }
            *box = beyond;
            std::sort(s.boxes.begin(), s.boxes.end());
        }
        s.player = next;
    }
    return s;
}

inline bool all_boxes_on_goals(const SearchState& state, const Level& level) {
    return std::all_of(state.boxes.begin(), state.boxes.end(), [&](const Cell& b) {
        return has_goal(level.at(static_cast<std::size_t>(b.row), static_cast<std::size_t>(b.col)));
    });
}

/// A* over (player, boxes) with unit move cost, a closed set and FIFO
/// tie-breaking on equal f. `budget` caps node expansions.
inline SolveResult solve(const Level& level, const SolverConfig& config = {}) {
    SolveResult result;
    const auto report = validate(level);
    if (!report.verdict) {
        result.status = SolveStatus::Invalid;
        if (report.player_count != 1) {
            result.reason = "expected exactly one player, found " + std::to_string(report.player_count);
        } else if (report.box_count == 0) {
            result.reason = "level has no boxes";
        } else {
            result.reason = "box count " + std::to_string(report.box_count) + " != goal count " +
                            std::to_string(report.goal_count);
        }
        return result;
    }
    if (level.size() > std::numeric_limits<std::uint16_t>::max()) {
        result.status = SolveStatus::Invalid;
        result.reason = "level too large";
        return result;
    }

    const detail::Board board(level);
    const SearchState start = initial_state(level);
    const std::size_t stride = 1 + start.boxes.size();
    detail::StateTable table(stride);

    struct NodeInfo {
        std::int32_t parent;
        int g;
        Move move;
        bool push;
        bool closed;
    };
    std::vector<NodeInfo> nodes;

    struct OpenEntry {
        int f;
        std::uint64_t seq;
        std::int32_t id;
        int g;
        bool operator>(const OpenEntry& o) const { return f != o.f ? f > o.f : seq > o.seq; }
    };
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::uint64_t seq = 0;

    std::vector<std::uint16_t> key(stride);
    std::vector<std::uint16_t> current(stride);
    auto h_of = [&](std::span<const std::uint16_t> k) {
        int h = 0;
        for (std::size_t i = 1; i < k.size(); ++i) h += board.box_distance(k[i]);
        return h;
    };

    key[0] = static_cast<std::uint16_t>(board.index(start.player));
    for (std::size_t i = 0; i < start.boxes.size(); ++i) {
        key[i + 1] = static_cast<std::uint16_t>(board.index(start.boxes[i]));
    }
    std::sort(key.begin() + 1, key.end());
    table.insert(key);
    nodes.push_back({-1, 0, Move::Up, false, false});

    const bool start_dead = config.deadlock_pruning &&
                            std::any_of(key.begin() + 1, key.end(), [&](auto b) { return board.corner_dead(b); });
    if (!start_dead) open.push({h_of(key), seq++, 0, 0});

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        NodeInfo& node = nodes[static_cast<std::size_t>(top.id)];
        if (node.closed || top.g != node.g) continue;
        node.closed = true;
        ++result.nodes_expanded;

        const auto stored = table.get(top.id);
        std::copy(stored.begin(), stored.end(), current.begin());
        std::copy(current.begin(), current.end(), key.begin());
        if (h_of(key) == 0) {
            result.status = SolveStatus::Solved;
            int pushes = 0;
            for (std::int32_t id = top.id; nodes[static_cast<std::size_t>(id)].parent >= 0;
                 id = nodes[static_cast<std::size_t>(id)].parent) {
                result.moves.push_back(nodes[static_cast<std::size_t>(id)].move);
                pushes += nodes[static_cast<std::size_t>(id)].push;
            }
            std::reverse(result.moves.begin(), result.moves.end());
            result.solution_len = static_cast<int>(result.moves.size());
            result.pushes = pushes;
            return result;
        }
        if (result.nodes_expanded >= config.budget) {
            result.status = SolveStatus::ExhaustedBudget;
            return result;
        }

        const int player = current[0];
        const int g = top.g;
        for (Move m : kMoveOrder) {
            const int next = board.step(player, m);
            if (next < 0 || board.wall_at(board.row(next), board.col(next))) continue;
            std::copy(current.begin(), current.end(), key.begin());
            auto boxes_begin = key.begin() + 1;
            auto box = std::lower_bound(boxes_begin, key.end(), static_cast<std::uint16_t>(next));
            const bool push = box != key.end() && *box == next;
            if (push) {
                const int beyond = board.step(next, m);
                if (beyond < 0 || board.wall_at(board.row(beyond), board.col(beyond))) continue;
                if (std::binary_search(boxes_begin, key.end(), static_cast<std::uint16_t>(beyond))) continue;
                if (config.deadlock_pruning && board.corner_dead(beyond)) continue;
                *box = static_cast<std::uint16_t>(beyond);
                std::sort(boxes_begin, key.end());
            }
            key[0] = static_cast<std::uint16_t>(next);

            auto [id, inserted] = table.insert(key);
            if (inserted) {
                nodes.push_back({top.id, g + 1, m, push, false});
            } else {
                NodeInfo& existing = nodes[static_cast<std::size_t>(id)];
                if (existing.closed || existing.g <= g + 1) continue;
                existing = {top.id, g + 1, m, push, false};
            }
            open.push({g + 1 + h_of(key), seq++, id, g + 1});
        }
    }
    result.status = SolveStatus::ProvedUnsolvable;
    return result;
}

}  // namespace sokgen
