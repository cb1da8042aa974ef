"""Mixed-radix indexing of (Z/pZ)^d.

State (x_0, ..., x_{d-1}) <-> index sum_i x_i * p^i, coordinate 0 least
significant. All dense vectors in the package (distributions, character
tables) use this encoding.
"""

from __future__ import annotations

import numpy as np


def num_states(p: int, d: int) -> int:
    return p**d


def encode(coords, p: int) -> np.ndarray:
    """Indices for an (m, d) array of residue coordinates."""
    coords = np.asarray(coords, dtype=np.int64)
    d = coords.shape[-1]
    weights = p ** np.arange(d, dtype=np.int64)
    return coords @ weights


def decode(indices, p: int, d: int) -> np.ndarray:
    """(m, d) residue coordinates for an index array."""
    idx = np.asarray(indices, dtype=np.int64)
    out = np.empty(idx.shape + (d,), dtype=np.int64)
    for i in range(d):
        out[..., i] = idx % p
        idx = idx // p
    return out


def all_coords(p: int, d: int) -> np.ndarray:
    """(p^d, d) table of every state's coordinates, in index order."""
    return decode(np.arange(num_states(p, d), dtype=np.int64), p, d)


def index_of(state, p: int) -> int:
    """Index of a single state given as a sequence of residues."""
    acc = 0
    for x in reversed(tuple(state)):
        acc = acc * p + int(x) % p
    return acc


def state_of(index: int, p: int, d: int) -> tuple[int, ...]:
    out = []
    for _ in range(d):
        index, r = divmod(index, p)
        out.append(r)
    return tuple(out)
