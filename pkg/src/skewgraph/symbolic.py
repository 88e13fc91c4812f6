"""Shift spaces, cylinder words, periodic representatives and Birkhoff sums.

Words are plain tuples of small integers.  Bulk operations work on
``(count, n)`` ``uint8`` arrays whose rows are words in lexicographic order.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, InvalidShift, NonClosableWord

Word = Tuple[int, ...]

DEFAULT_WORD_BUDGET = 1 << 22


@dataclass(frozen=True)
class ShiftSpace:
    """Subshift of finite type on ``alphabet_size`` symbols.

    ``transition[a][b] == 1`` means the block ``ab`` is allowed.  The matrix
    must be primitive.  ``entropy_override`` replaces the topological entropy
    in pressure computations for constant potentials; it is used to model a
    base whose coding is not constructed explicitly (the cat map).
    """

    alphabet_size: int
    transition: Tuple[Tuple[int, ...], ...]
    entropy_override: Optional[float] = None
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.alphabet_size)
        if n < 1:
            raise InvalidShift("alphabet_size must be positive")
        mat = np.array(self.transition, dtype=np.int64)
        if mat.shape != (n, n):
            raise InvalidShift(f"transition must be {n}x{n}, got {mat.shape}")
        if not np.isin(mat, (0, 1)).all():
            raise InvalidShift("transition entries must be 0 or 1")
        if (mat.sum(axis=1) == 0).any() or (mat.sum(axis=0) == 0).any():
            raise InvalidShift("transition has a dead symbol (empty row or column)")
        if not _is_primitive(mat):
            raise InvalidShift("transition matrix is not primitive")
        object.__setattr__(self, "transition", tuple(tuple(int(v) for v in row) for row in mat))
        mat.setflags(write=False)
        object.__setattr__(self, "_matrix", mat)

    @classmethod
    def full(cls, n: int, entropy_override: Optional[float] = None) -> "ShiftSpace":
        return cls(n, tuple((1,) * n for _ in range(n)), entropy_override)

    @classmethod
    def from_matrix(cls, matrix, entropy_override=None) -> "ShiftSpace":
        matrix = np.asarray(matrix)
        return cls(matrix.shape[0], tuple(map(tuple, matrix.tolist())), entropy_override)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def is_full(self) -> bool:
        return bool(self._matrix.all())

    def allowed(self, a: int, b: int) -> bool:
        return bool(self._matrix[a, b])

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(s < 0 or s >= self.alphabet_size for s in word):
            return False
        return all(self._matrix[a, b] for a, b in zip(word, word[1:]))

    def count_words(self, n: int) -> int:
        """Number of admissible words of length ``n`` (exact integer)."""
        if n <= 0:
            return 1 if n == 0 else 0
        mat = [[int(v) for v in row] for row in self.transition]
        vec = [1] * self.alphabet_size
        for _ in range(n - 1):
            vec = [sum(mat[a][b] * vec[b] for b in range(self.alphabet_size))
                   for a in range(self.alphabet_size)]
        return sum(vec)

    def spectral_radius(self) -> float:
        return float(max(abs(np.linalg.eigvals(self._matrix.astype(float)))))

    def entropy(self) -> float:
        if self.entropy_override is not None:
            return float(self.entropy_override)
        return math.log(self.spectral_radius())


def _is_primitive(mat: np.ndarray) -> bool:
    # Wielandt: a primitive n x n matrix has A^{(n-1)^2+1} > 0.
    n = mat.shape[0]
    b = (mat > 0).astype(np.int64)
    power = b.copy()
    for _ in range((n - 1) ** 2):
        power = ((power @ b) > 0).astype(np.int64)
    return bool(power.all())


# ---------------------------------------------------------------------------
# Words


def cylinder_words(shift: ShiftSpace, n: int) -> Iterator[Word]:
    """Yield every admissible word of length ``n`` once, lexicographically."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if shift.is_full:
        yield from itertools.product(range(shift.alphabet_size), repeat=n)
        return
    mat = shift.matrix
    succ = [[b for b in range(shift.alphabet_size) if mat[a, b]] for a in range(shift.alphabet_size)]

    def extend(prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in succ[prefix[-1]]:
            prefix.append(b)
            yield from extend(prefix)
            prefix.pop()

    for a in range(shift.alphabet_size):
        yield from extend([a])


def word_array(shift: ShiftSpace, n: int, budget: int = DEFAULT_WORD_BUDGET) -> np.ndarray:
    """All admissible words of length ``n`` as a lexicographically ordered array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = shift.count_words(n)
    if count > budget:
        raise BudgetExceeded(f"{count} words of length {n} exceed the budget of {budget}")
    N = shift.alphabet_size
    mat = shift.matrix.astype(bool)
    words = np.arange(N, dtype=np.uint8)[:, None]
    for _ in range(n - 1):
        parents = np.repeat(words, N, axis=0)
        nxt = np.tile(np.arange(N, dtype=np.uint8), len(words))
        keep = mat[parents[:, -1], nxt]
        words = np.concatenate([parents[keep], nxt[keep, None]], axis=1)
    return words


# ---------------------------------------------------------------------------
# Periodic representatives


@dataclass(frozen=True)
class PeriodicSequence:
    """The one-sided sequence ``block block block ...``."""

    block: Word

    def __post_init__(self):
        if not self.block:
            raise ValueError("empty period block")

    @property
    def period(self) -> int:
        return len(self.block)

    def __getitem__(self, i: int) -> int:
        return self.block[i % len(self.block)]

    def take(self, m: int) -> Word:
        reps = -(-m // len(self.block))
        return (self.block * reps)[:m]

    def shifted(self, k: int) -> "PeriodicSequence":
        k %= len(self.block)
        return PeriodicSequence(self.block[k:] + self.block[:k])


def bridge(shift: ShiftSpace, last: int, first: int) -> Word:
    """Lexicographically least shortest path ``last -> b1 ... bj -> first``.

    Returns the empty tuple when ``last -> first`` is itself allowed.
    """
    if shift.allowed(last, first):
        return ()
    mat = shift.matrix
    N = shift.alphabet_size
    # BFS over paths in lexicographic order; first arrival is lexicographically least.
    queue = deque([(last, ())])
    seen = {last}
    while queue:
        node, path = queue.popleft()
        for b in range(N):
            if not mat[node, b]:
                continue
            if mat[b, first]:
                return path + (b,)
            if b not in seen:
                seen.add(b)
                queue.append((b, path + (b,)))
    raise NonClosableWord(f"no admissible path from {last} back to {first}")


def periodic_completion(word: Sequence[int], shift: Optional[ShiftSpace] = None) -> PeriodicSequence:
    """Periodic representative of the cylinder ``[word]``.

    If the word cannot be closed, the lexicographically least shortest
    admissible loop back to its first symbol is appended before repeating.
    """
    word = tuple(int(s) for s in word)
    if not word:
        raise ValueError("empty word")
    if shift is None:
        return PeriodicSequence(word)
    if not shift.is_admissible(word):
        raise NonClosableWord(f"word {word} is not admissible")
    return PeriodicSequence(word + bridge(shift, word[-1], word[0]))


# ---------------------------------------------------------------------------
# Potentials


class OneSidedPotential:
    """Locally constant potential on the one-sided shift.

    ``values`` has shape ``(N,) * depth``; the potential at a sequence is
    ``values[i_0, ..., i_{depth-1}]``.  Depth 0 means constant.
    """

    __slots__ = ("values", "depth", "alphabet_size")

    def __init__(self, values, alphabet_size: Optional[int] = None):
        arr = np.array(values, dtype=float)
        if arr.ndim == 0:
            self.alphabet_size = alphabet_size
        else:
            if len(set(arr.shape)) != 1:
                raise ValueError(f"values must have shape (N,)*depth, got {arr.shape}")
            if alphabet_size is not None and arr.shape[0] != alphabet_size:
                raise ValueError("values disagree with alphabet_size")
            self.alphabet_size = arr.shape[0]
        if not np.all(np.isfinite(arr)):
            raise ValueError("potential values must be finite")
        arr.setflags(write=False)
        self.values = arr
        self.depth = arr.ndim

    @classmethod
    def constant(cls, c: float) -> "OneSidedPotential":
        return cls(float(c))

    @classmethod
    def from_symbols(cls, values: Sequence[float]) -> "OneSidedPotential":
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def from_words(cls, depth: int, mapping: dict, alphabet_size: int, default: float = 0.0) -> "OneSidedPotential":
        arr = np.full((alphabet_size,) * depth, float(default))
        for word, v in mapping.items():
            arr[tuple(word)] = v
        return cls(arr)

    def __call__(self, sequence) -> float:
        if self.depth == 0:
            return float(self.values)
        if isinstance(sequence, PeriodicSequence):
            key = sequence.take(self.depth)
        else:
            key = tuple(sequence[: self.depth])
            if len(key) < self.depth:
                raise ValueError(f"need {self.depth} symbols, got {len(key)}")
        return float(self.values[key])

    def lifted(self, depth: int, alphabet_size: Optional[int] = None) -> np.ndarray:
        """Values as an array of the larger ``depth`` (trailing symbols ignored)."""
        if depth < self.depth:
            raise ValueError("cannot lower the depth of a potential")
        n = self.alphabet_size or alphabet_size
        if depth == self.depth:
            return np.asarray(self.values)
        if n is None:
            raise ValueError("alphabet size unknown for a constant potential")
        arr = np.asarray(self.values).reshape(self.values.shape + (1,) * (depth - self.depth))
        return np.broadcast_to(arr, (n,) * depth).copy()

    def _combine(self, other, op):
        if not isinstance(other, OneSidedPotential):
            other = OneSidedPotential.constant(float(other))
        n = self.alphabet_size or other.alphabet_size
        if self.alphabet_size and other.alphabet_size and self.alphabet_size != other.alphabet_size:
            raise ValueError("potentials live on different alphabets")
        depth = max(self.depth, other.depth)
        return OneSidedPotential(op(self.lifted(depth, n), other.lifted(depth, n)), n)

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return OneSidedPotential(np.asarray(self.values) * float(c), self.alphabet_size)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    @property
    def inf(self) -> float:
        return float(np.min(self.values))

    def __repr__(self):
        return f"OneSidedPotential(depth={self.depth}, values={self.values.tolist()!r})"


def birkhoff_sum(psi: OneSidedPotential, word: Sequence[int], n: int,
                 shift: Optional[ShiftSpace] = None) -> float:
    """``S_n psi`` at the periodic completion of ``word``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if psi.depth == 0:
        return n * float(psi.values)
    seq = word if isinstance(word, PeriodicSequence) else periodic_completion(word, shift)
    symbols = seq.take(n + psi.depth - 1)
    vals = psi.values
    return math.fsum(float(vals[symbols[i:i + psi.depth]]) for i in range(n))


def completion_tails(words: np.ndarray, length: int, shift: Optional[ShiftSpace]) -> np.ndarray:
    """First ``length`` symbols following each word in its periodic completion."""
    count, n = words.shape
    if length == 0:
        return np.zeros((count, 0), dtype=words.dtype)
    out = np.empty((count, length), dtype=words.dtype)
    if shift is None or shift.is_full:
        groups = {(): np.arange(count)}
    else:
        groups = {}
        N = shift.alphabet_size
        keys = words[:, -1].astype(np.int64) * N + words[:, 0]
        for key in np.unique(keys):
            b = bridge(shift, int(key // N), int(key % N))
            groups.setdefault(b, []).append(np.nonzero(keys == key)[0])
        groups = {b: np.concatenate(ix) for b, ix in groups.items()}
    for b, idx in groups.items():
        cycle = np.concatenate([np.tile(np.array(b, dtype=words.dtype), (len(idx), 1)), words[idx]], axis=1)
        reps = -(-length // cycle.shape[1])
        out[idx] = np.tile(cycle, (1, reps))[:, :length]
    return out


def birkhoff_sums(psi: OneSidedPotential, words: np.ndarray, shift: Optional[ShiftSpace] = None) -> np.ndarray:
    """Vectorised ``S_n psi`` at the periodic completions of the rows of ``words``."""
    count, n = words.shape
    if psi.depth == 0:
        return np.full(count, n * float(psi.values))
    k = psi.depth
    ext = np.concatenate([words, completion_tails(words, k - 1, shift)], axis=1).astype(np.int64)
    N = psi.alphabet_size
    flat = np.asarray(psi.values).ravel()
    code = np.zeros((count, n), dtype=np.int64)
    for j in range(k):
        code = code * N + ext[:, j:j + n]
    return flat[code].sum(axis=1)
