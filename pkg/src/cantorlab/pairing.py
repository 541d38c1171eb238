"""Diagonal pairing between input positions and cells of a bit table.

Cell (row, col) sits at position T(row + col) + row with T(n) = n(n+1)/2, so
positions 0, 1, 2, 3, ... are (0,0), (0,1), (1,0), (0,2), (1,1), (2,0), ...
"""

from __future__ import annotations

from math import isqrt


def table_position(row: int, col: int) -> int:
    if row < 0 or col < 0:
        raise ValueError("table indices must be non-negative")
    d = row + col
    return d * (d + 1) // 2 + row


def table_address(position: int) -> tuple[int, int]:
    """Inverse of :func:`table_position`."""
    if position < 0:
        raise ValueError("position must be non-negative")
    d = (isqrt(8 * position + 1) - 1) // 2
    row = position - d * (d + 1) // 2
    return row, d - row
