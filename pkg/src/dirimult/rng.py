"""Portable deterministic random numbers (pure-Python lane).

The compiled kernel in ``dirimult._mckernel`` implements the exact same
bit-stream; the two lanes must stay byte-for-byte interchangeable, which
the test suite asserts.  Keep any change here mirrored there.

Bit-stream contract
-------------------
* Generator: xoshiro256** (Blackman/Vigna), 64-bit outputs.
* Seeding: the four state words are the first four outputs of a
  splitmix64 sequence started at the 64-bit seed.
* Stream derivation: ``derive_seed(master, index)`` is the splitmix64
  output for counter value ``master + (index + 1) * GOLDEN`` — i.e. child
  ``index`` gets splitmix64's ``index+1``-th output from ``master``.
* ``uniform``: ``((next_u64() >> 11) + 1) * 2**-53``, in (0, 1].
* ``normal``: one Box-Muller value per call,
  ``sqrt(-2 ln u1) * cos(2 pi u2)`` (the sine partner is discarded so the
  stream needs no cached state).
* ``gamma`` (shape ``a >= 1``): Marsaglia-Tsang squeeze/rejection;
  shape ``a < 1`` uses the boost ``gamma(a + 1) * u**(1/a)`` with the
  uniform drawn *after* the recursive draw.

Only ``log``, ``exp``, ``sqrt``, ``cos`` and ``pow`` are used past the
integer stage; these are thin libm wrappers in CPython, which is what
makes lane-identical doubles possible.
"""

from __future__ import annotations

import math

from dirimult.errors import ValidationError

__all__ = [
    "GOLDEN",
    "mix64",
    "derive_seed",
    "Xoshiro256StarStar",
    "u64_sequence",
    "gamma_sequence",
    "predictive_mc_moments",
]

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 6.283185307179586


def mix64(z: int) -> int:
    """splitmix64 output function (Stafford mix of the counter value)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Child seed ``index`` of ``master``: well-spread, documented, cheap."""
    if index < 0:
        raise ValidationError(f"stream index must be non-negative, got {index}")
    return mix64(master + (index + 1) * GOLDEN)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding; see the module docstring."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        z = seed & _MASK
        s = []
        for _ in range(4):
            z = (z + GOLDEN) & _MASK
            s.append(mix64(z))
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * _INV_2_53

    def normal(self) -> float:
        """Standard normal via Box-Muller (cosine branch only)."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) variate; shape may be any positive real."""
        if shape <= 0.0:
            raise ValidationError(f"gamma shape must be positive, got {shape!r}")
        if shape < 1.0:
            g = self._gamma_ge1(shape + 1.0)
            u = self.uniform()
            return g * (u ** (1.0 / shape))
        return self._gamma_ge1(shape)

    def _gamma_ge1(self, shape: float) -> float:
        d = shape - (1.0 / 3.0)
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform()
            xx = x * x
            if u < 1.0 - 0.0331 * xx * xx:
                return d * v
            if math.log(u) < 0.5 * xx + d * (1.0 - v + math.log(v)):
                return d * v


def u64_sequence(seed: int, n: int) -> list[int]:
    """First ``n`` raw 64-bit outputs for ``seed`` (lane-identity tests)."""
    rng = Xoshiro256StarStar(seed)
    return [rng.next_u64() for _ in range(n)]


def gamma_sequence(seed: int, shape: float, n: int) -> list[float]:
    """First ``n`` gamma variates for ``seed`` (lane-identity tests)."""
    rng = Xoshiro256StarStar(seed)
    return [rng.gamma(shape) for _ in range(n)]


def predictive_mc_moments(
    alpha: tuple[float, ...],
    counts: tuple[int, ...],
    log_coef: float,
    n_samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the multinomial pmf at
    ``counts`` under Dirichlet(``alpha``).

    Each sample draws one gamma variate per component in order, normalizes
    to a Dirichlet point, and evaluates ``exp(log_coef + sum_j y_j log
    theta_j)``.  ``log_coef`` is the log multinomial coefficient, computed
    by the caller (CPython's lgamma is not bit-identical to libm's, so it
    must not be computed inside either lane).

    Returns ``(mean, stderr)`` in linear probability space.
    """
    k = len(alpha)
    if len(counts) != k:
        raise ValidationError(
            f"alpha and counts disagree in length: {k} vs {len(counts)}"
        )
    if n_samples < 1:
        raise ValidationError(f"n_samples must be positive, got {n_samples}")
    rng = Xoshiro256StarStar(seed)
    gammas = [0.0] * k
    sum_p = 0.0
    sum_p2 = 0.0
    for _ in range(n_samples):
        total = 0.0
        for j in range(k):
            g = rng.gamma(alpha[j])
            gammas[j] = g
            total += g
        log_total = math.log(total)
        logp = log_coef
        for j in range(k):
            y = counts[j]
            if y != 0:
                logp += y * (math.log(gammas[j]) - log_total)
        p = math.exp(logp)
        sum_p += p
        sum_p2 += p * p
    mean = sum_p / n_samples
    if n_samples == 1:
        return mean, 0.0
    var = (sum_p2 - sum_p * sum_p / n_samples) / (n_samples - 1)
    if var < 0.0:
        var = 0.0
    stderr = math.sqrt(var / n_samples)
    return mean, stderr
