"""Maximum length sequences: LFSR generation plus auto/cross-correlation.

A maximum length sequence (MLS) is the +-1 output of a Fibonacci linear
feedback shift register driven by a primitive feedback polynomial.  Its
circular autocorrelation is 1 at lag zero and exactly -1/L at every other
lag, so cross-correlating a recording against the emitted sequence turns
every propagation path into a narrow, well-separated peak.  That property
is what the ranging stage relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "MIN_ORDER",
    "MAX_ORDER",
    "MlsSequence",
    "CorrelationSeries",
    "generate_mls",
    "circular_autocorrelation",
    "cross_correlate",
    "default_taps",
]

MIN_ORDER = 2
MAX_ORDER = 24

# Feedback taps per register order, Fibonacci convention: the bit shifted
# into the register is the XOR of the listed (1-based) stages, with stage
# `order` the oldest.  Every entry is primitive, so the register visits all
# 2**order - 1 nonzero states; the fixed table keeps outputs reproducible.
_DEFAULT_TAPS = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 11, 10, 4),
    13: (13, 12, 11, 8),
    14: (14, 13, 12, 2),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 18, 17, 14),
    20: (20, 17),
    21: (21, 19),
    22: (22, 21),
    23: (23, 18),
    24: (24, 23, 22, 17),
}


def default_taps(order: int) -> tuple[int, ...]:
    """Built-in primitive feedback taps for `order` (2..24)."""
    if order not in _DEFAULT_TAPS:
        raise ValueError(f"order must be between {MIN_ORDER} and {MAX_ORDER}, got {order}")
    return _DEFAULT_TAPS[order]


@dataclass(frozen=True)
class MlsSequence:
    """One period of a maximum length sequence with its LFSR provenance.

    `samples` holds the +-1 mapping of the register output (bit 1 -> +1,
    bit 0 -> -1) and has length 2**order - 1.
    """

    order: int
    taps: tuple[int, ...]
    seed: tuple[int, ...]
    samples: np.ndarray

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def length(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class CorrelationSeries:
    """Correlation values indexed by lag.

    `normalization` is "unit-peak" when the values were divided so the
    zero-lag peak of a +-1 sequence is exactly 1, "raw" for plain sums.
    """

    values: np.ndarray
    normalization: str

    @property
    def length(self) -> int:
        return int(self.values.size)


def _gf2_mulmod(a: int, b: int, poly: int, order: int) -> int:
    # Carry-less product of two GF(2) polynomials, reduced mod `poly`.
    acc = 0
    top = 1 << order
    while a:
        if a & 1:
            acc ^= b
        a >>= 1
        b <<= 1
        if b & top:
            b ^= poly
    return acc


def _x_pow_mod(exponent: int, poly: int, order: int) -> int:
    # x**exponent mod poly by square-and-multiply.
    result, base = 1, 2
    while exponent:
        if exponent & 1:
            result = _gf2_mulmod(result, base, poly, order)
        base = _gf2_mulmod(base, base, poly, order)
        exponent >>= 1
    return result


def _lfsr_bits(order: int, taps: tuple[int, ...], seed: tuple[int, ...], count: int) -> np.ndarray:
    """First `count` output bits of the Fibonacci LFSR (uint8 array).

    The register outputs its oldest stage each step, so the first `order`
    outputs are the seed reversed and every later bit obeys the linear
    recurrence bit[m] = XOR of bit[m - t] over the taps.  Instead of
    stepping the register, the prefix is extended by doubling: the
    coefficients of x**m mod p(x) express bit m+j in terms of bits
    j..j+order-1, which vectorizes the whole extension.
    """
    bits = np.zeros(count, dtype=np.uint8)
    head = min(order, count)
    bits[:head] = np.asarray(seed[::-1][:head], dtype=np.uint8)
    if count <= order:
        return bits

    poly = 1 << order
    for t in taps:
        poly ^= 1 << (order - t)

    m = order
    while m < count:
        coeff = _x_pow_mod(m, poly, order)
        k = min(m - order + 1, count - m)
        block = np.zeros(k, dtype=np.uint8)
        for i in range(order):
            if (coeff >> i) & 1:
                block ^= bits[i:i + k]
        bits[m:m + k] = block
        m += k
    return bits


def _minimal_period(bits: np.ndarray, order: int, length: int) -> int | None:
    """Minimal period of the register output, or None if none is visible.

    `bits` must hold length + order values.  Each length-`order` window of
    outputs determines the register state, so the first index m > 0 whose
    window matches window 0 is the exact period.
    """
    packed = np.zeros(length + 1, dtype=np.int32)
    for i in range(order):
        packed |= bits[i:i + length + 1].astype(np.int32) << i
    matches = np.flatnonzero(packed == packed[0])
    if matches.size < 2:
        return None
    return int(matches[1])


def generate_mls(order: int, taps=None, seed=None) -> MlsSequence:
    """Generate one period of a maximum length sequence.

    Parameters
    ----------
    order : int
        Register length n; the sequence has period 2**n - 1.  Supported
        range is 2..24.
    taps : iterable of int, optional
        Feedback stage indices (1-based, stage `order` = oldest bit).
        Defaults to a built-in primitive set for the order.  Taps that do
        not produce the maximal period are rejected by an exact cycle
        check.
    seed : iterable of 0/1, optional
        Initial register state, front stage first; must be nonzero.
        Defaults to all ones.

    Returns
    -------
    MlsSequence
        The +-1 sequence plus the register parameters that produced it.
    """
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
        raise ValueError(f"order must be an integer, got {order!r}")
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"order must be between {MIN_ORDER} and {MAX_ORDER}, got {order}")
    order = int(order)

    if taps is None:
        taps = _DEFAULT_TAPS[order]
    taps = tuple(sorted({int(t) for t in taps}, reverse=True))
    if not taps or taps[0] > order or taps[-1] < 1:
        raise ValueError(f"taps must be register stages in 1..{order}, got {taps}")

    if seed is None:
        seed = (1,) * order
    seed = tuple(int(b) for b in seed)
    if len(seed) != order:
        raise ValueError(f"seed must hold {order} register bits, got {len(seed)}")
    if any(b not in (0, 1) for b in seed):
        raise ValueError("seed bits must be 0 or 1")
    if not any(seed):
        raise ValueError("seed must be a nonzero register state")

    length = 2 ** order - 1
    bits = _lfsr_bits(order, taps, seed, length + order)
    period = _minimal_period(bits, order, length)
    if period != length:
        raise ValueError(
            f"taps {taps} give period {period}, not the maximal {length}; "
            "the feedback polynomial is not primitive"
        )

    samples = bits[:length].astype(np.int8) * 2 - 1
    return MlsSequence(order=order, taps=taps, seed=seed, samples=samples)


def _as_samples(signal) -> np.ndarray:
    return np.asarray(getattr(signal, "samples", signal), dtype=np.float64)


def circular_autocorrelation(seq) -> CorrelationSeries:
    """Periodic autocorrelation of a +-1 sequence, normalized by its length.

    values[l] = (1/L) * sum_k seq[k] * seq[(k+l) mod L].  For a valid MLS
    this is 1 at lag 0 and -1/L everywhere else.
    """
    x = _as_samples(seq)
    if x.size == 0:
        raise ValueError("cannot autocorrelate an empty sequence")
    if not np.all(np.abs(x) == 1.0):
        raise ValueError("circular autocorrelation expects a +-1 valued sequence")
    length = x.size
    spectrum = np.fft.rfft(x)
    values = np.fft.irfft(np.abs(spectrum) ** 2, n=length) / length
    return CorrelationSeries(values=values, normalization="unit-peak")


def cross_correlate(recorded, reference) -> CorrelationSeries:
    """Linear cross-correlation of `reference` against `recorded`.

    values[l] = sum_k reference[k] * recorded[l + k] for every lag l at
    which the reference fits inside the recording (0..N-M).  Computed via
    FFT convolution, so long recordings stay cheap.
    """
    rec = _as_samples(recorded)
    ref = _as_samples(reference)
    if ref.size == 0 or rec.size == 0:
        raise ValueError("cannot correlate empty signals")
    if rec.size < ref.size:
        raise ValueError(
            f"recorded signal ({rec.size} samples) is shorter than the reference ({ref.size})"
        )
    values = fftconvolve(rec, ref[::-1], mode="valid")
    return CorrelationSeries(values=values, normalization="raw")
