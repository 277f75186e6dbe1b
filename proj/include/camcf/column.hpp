#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "camcf/error.hpp"

namespace camcf {

using Code = std::uint32_t;

/// Non-owning view of a discrete column: every code is < arity.
struct ColumnView {
    std::span<const Code> codes;
    Code arity = 0;

    std::size_t size() const { return codes.size(); }
};

/// Owning discrete column.
struct DiscreteColumn {
    std::vector<Code> codes;
    Code arity = 0;

    DiscreteColumn() = default;
    DiscreteColumn(std::vector<Code> c, Code a) : codes(std::move(c)), arity(a) {}

    /// Arity is taken as max code + 1 (1 for an empty column).
    static DiscreteColumn from_codes(std::vector<Code> c)
    {
        Code top = 0;
        for (Code v : c) top = std::max(top, v);
        const Code arity = c.empty() ? 1 : top + 1;
        return DiscreteColumn(std::move(c), arity);
    }

    std::size_t size() const { return codes.size(); }
    ColumnView view() const { return ColumnView{codes, arity}; }
    operator ColumnView() const { return view(); }

    friend bool operator==(const DiscreteColumn&, const DiscreteColumn&) = default;
};

inline void check_codes(ColumnView col, const std::string& what)
{
    for (std::size_t i = 0; i < col.codes.size(); ++i) {
        if (col.codes[i] >= col.arity) {
            throw Error(what + ": code " + std::to_string(col.codes[i]) + " at row " +
                        std::to_string(i) + " exceeds arity " + std::to_string(col.arity));
        }
    }
}

} // namespace camcf
