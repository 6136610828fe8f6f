"""Memoryless string sources and their scalar invariants.

A source is a probability vector p over a finite alphabet {0, .., m-1};
keys are infinite strings with i.i.d. characters drawn from p.  The
quantities computed here drive everything downstream:

    H   = sum_a p_a log(1/p_a)            (entropy)
    J   = sum_a (1-p_a) log(1/(1-p_a))    (coentropy; J = H for m = 2)
    rho(s) = sum_a p_a^s                  (s strings share their first char,
                                           for integer s)
    d_p = generator of the lattice spanned by {log p_a}, or 0 when that
          additive group is dense in R.

Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

_PROB_SUM_TOL = 1e-12


def _rational_from_float(x: float, tolerance: float, depth: int) -> Fraction | None:
    """Detect whether x is rational, by continued-fraction expansion.

    Returns the detected fraction in lowest terms, or None when no expansion
    terminates within ``depth`` steps (x is treated as irrational).  The
    termination test is on the residual of each step, not on closeness of a
    convergent, so high-denominator accidental approximations of irrationals
    are not accepted.
    """
    if x <= 0:
        return None
    p_prev, q_prev = 1, 0
    a0 = math.floor(x)
    p, q = a0, 1
    frac = x - a0
    for _ in range(depth):
        if abs(frac) <= tolerance:
            return Fraction(p, q) if q else None
        x_next = 1.0 / frac
        a = math.floor(x_next)
        frac = x_next - a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    if abs(frac) <= tolerance:
        return Fraction(p, q)
    return None


@dataclass(frozen=True)
class SourceDistribution:
    """Character distribution of a memoryless source.

    probs must have length >= 2, every entry strictly inside (0, 1), and sum
    to 1 within 1e-12.  Instances are immutable and safe to share between
    threads.
    """

    probs: tuple[float, ...]
    _cum_head: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 2:
            raise ValueError(f"alphabet size must be >= 2, got {len(probs)}")
        for p in probs:
            if not (0.0 < p < 1.0):
                raise ValueError(f"every probability must lie strictly in (0,1), got {p}")
        if abs(sum(probs) - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities must sum to 1 within {_PROB_SUM_TOL}, got {sum(probs)}")
        object.__setattr__(self, "probs", probs)
        # cumulative sums of all but the last mass: searchsorted lands in 0..m-1
        object.__setattr__(self, "_cum_head", np.cumsum(np.asarray(probs[:-1])))

    @classmethod
    def uniform(cls, m: int) -> "SourceDistribution":
        return cls(tuple(1.0 / m for _ in range(m)))

    @classmethod
    def parse(cls, spec: str) -> "SourceDistribution":
        """Parse a command-line source spec: '0.5,0.5' or 'uniform:3'."""
        spec = spec.strip()
        if spec.startswith("uniform:"):
            return cls.uniform(int(spec.split(":", 1)[1]))
        return cls(tuple(float(tok) for tok in spec.split(",")))

    @property
    def m(self) -> int:
        """Alphabet size."""
        return len(self.probs)

    def entropy(self) -> float:
        """H = sum_a p_a log(1/p_a)."""
        return -sum(p * math.log(p) for p in self.probs)

    def coentropy(self) -> float:
        """J = sum_a (1-p_a) log(1/(1-p_a)); equals entropy for m = 2."""
        return -sum((1.0 - p) * math.log1p(-p) for p in self.probs)

    def rho(self, s: complex) -> complex:
        """rho(s) = sum_a p_a^s; real and in (0,1) for real s > 1."""
        if isinstance(s, complex):
            return sum(p**s for p in self.probs)
        return float(sum(p**s for p in self.probs))

    def periodicity(self, tolerance: float = 1e-10, depth: int = 40) -> float:
        """Period d_p of the lattice generated by {log p_a}, or 0.

        d_p is the largest d > 0 with every log p_a in d*Z.  Detection runs a
        continued-fraction rationality test on the ratios log p_a / log p_1;
        any ratio that fails to terminate within ``depth`` steps at residual
        ``tolerance`` makes the group dense and the result 0.  Near-lattice
        cases within tolerance resolve to the lattice answer.
        """
        lengths = [-math.log(p) for p in self.probs]
        ref = lengths[0]
        ratios = []
        for length in lengths:
            r = _rational_from_float(length / ref, tolerance, depth)
            if r is None:
                return 0.0
            ratios.append(r)
        lcm_den = math.lcm(*(r.denominator for r in ratios))
        gcd_num = math.gcd(*(r.numerator * (lcm_den // r.denominator) for r in ratios))
        return ref * gcd_num / lcm_den

    def sample_stream(self, rng: np.random.Generator) -> "CharStream":
        """Lazy infinite character stream; deterministic given rng state.

        The stream owns its generator: parallel consumers must derive
        independent generators (e.g. via SeedSequence spawning).
        """
        return CharStream(self, rng)

    def draw_chars(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Vectorized character draw: int8 array of the given shape."""
        u = rng.random(shape)
        if len(self.probs) == 2:
            return (u >= self.probs[0]).astype(np.int8)
        return np.searchsorted(self._cum_head, u, side="right").astype(np.int8)


class CharStream:
    """Infinite i.i.d. character sequence, materialized on demand."""

    _BLOCK = 64

    def __init__(self, dist: SourceDistribution, rng: np.random.Generator):
        self._dist = dist
        self._rng = rng
        self._buf: list[int] = []

    def __getitem__(self, i: int) -> int:
        while i >= len(self._buf):
            self._buf.extend(self._dist.draw_chars(self._rng, self._BLOCK).tolist())
        return self._buf[i]

    def prefix(self, n: int) -> tuple[int, ...]:
        """The first n characters as a tuple."""
        if n > 0:
            self[n - 1]
        return tuple(self._buf[:n])
