#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace sortie {

// Grid cell, row-major with (0,0) at the top-left corner.
struct Cell {
    int row = 0;
    int col = 0;

    auto operator<=>(const Cell&) const = default;
};

// Signed cell displacement, used for relative repairs and zone templates.
struct Offset {
    int drow = 0;
    int dcol = 0;

    auto operator<=>(const Offset&) const = default;
};

inline Cell operator+(Cell c, Offset o) { return Cell{c.row + o.drow, c.col + o.dcol}; }
inline Offset operator-(Cell a, Cell b) { return Offset{a.row - b.row, a.col - b.col}; }
inline Offset operator-(Offset a, Offset b) { return Offset{a.drow - b.drow, a.dcol - b.dcol}; }

// Movement and range metric: 8-connected grid, square envelopes.
inline int chebyshev(Cell a, Cell b) {
    return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

// Used for the weak-fault displacement predicate and position feature terms.
inline double euclidean(Cell a, Cell b) {
    const double dr = a.row - b.row;
    const double dc = a.col - b.col;
    return std::sqrt(dr * dr + dc * dc);
}

inline std::string to_string(Cell c) {
    return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

inline std::string to_string(Offset o) {
    return "(" + std::to_string(o.drow) + "," + std::to_string(o.dcol) + ")";
}

} // namespace sortie
