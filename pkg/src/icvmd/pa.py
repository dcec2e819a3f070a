"""Power-amplifier distortion models that imprint per-emitter fingerprints.

Two models are provided:

* Hammerstein: a static odd-order polynomial nonlinearity followed by a causal
  FIR memory filter.  This is the workhorse used for the emitter bank.
* A general finite Volterra series, kept as a brute-force reference for
  cross-checking the Hammerstein path (a Hammerstein model is a Volterra
  series with separable kernels).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .signals import ComplexSignal


def _check_coeffs(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite")
    if not np.any(arr != 0.0):
        raise ParameterError(f"{name} must have at least one nonzero entry")
    return arr


@dataclass(frozen=True)
class EmitterProfile:
    """Hammerstein fingerprint of one emitter.

    nonlinear_coeffs b[k], k = 1..K -- weights of the odd polynomial
        sum_k b[k] * x * |x|**(k-1); even-order entries are normally zero.
    memory_taps c[q], q = 0..Q-1 -- causal FIR taps applied after the
        nonlinearity.
    """

    emitter_id: int
    nonlinear_coeffs: np.ndarray
    memory_taps: np.ndarray

    def __post_init__(self):
        b = _check_coeffs("nonlinear_coeffs", self.nonlinear_coeffs)
        c = _check_coeffs("memory_taps", self.memory_taps)
        b.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "nonlinear_coeffs", b)
        object.__setattr__(self, "memory_taps", c)

    @property
    def nonlinear_order(self) -> int:
        return self.nonlinear_coeffs.size

    @property
    def memory_depth(self) -> int:
        return self.memory_taps.size


@dataclass(frozen=True)
class VolterraKernels:
    """Triangular-free Volterra kernels: ``kernels[k]`` has order k+1 and shape (Q,)*(k+1)."""

    kernels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        kerns = []
        for order0, h in enumerate(self.kernels):
            h = np.asarray(h, dtype=complex)
            expect_ndim = order0 + 1
            if h.ndim != expect_ndim:
                raise ParameterError(
                    f"kernel of order {expect_ndim} must have {expect_ndim} axes, got {h.ndim}"
                )
            if len(set(h.shape)) > 1:
                raise ParameterError("each kernel must be hypercubic (same depth on all axes)")
            if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
                raise ParameterError("kernels must be finite")
            kerns.append(h)
        object.__setattr__(self, "kernels", tuple(kerns))


# Odd-order envelope coefficients of the seven-emitter bank: (b3, b5) pairs with
# b1 = 1 and even orders zero.  These are the fixed fingerprints the
# classification experiments try to tell apart.
_BANK_B3_B5 = (
    (0.1126, 0.2937),
    (0.2479, 0.1396),
    (0.3959, 0.1948),
    (0.5027, 0.2833),
    (0.1683, 0.4412),
    (0.3246, 0.3463),
    (0.4698, 0.3946),
)

# Shared memory taps: a mildly dispersive causal FIR, dominated by the direct path.
DEFAULT_MEMORY_TAPS = (1.0, 0.05, 0.01, 0.005, 0.001, 0.0005)


def emitter_bank(memory_taps=DEFAULT_MEMORY_TAPS) -> list:
    """The standard bank of seven Hammerstein emitter profiles.

    All emitters share ``memory_taps``; they differ only in the odd
    polynomial coefficients, which is where the fingerprint lives.
    """
    profiles = []
    for idx, (b3, b5) in enumerate(_BANK_B3_B5):
        b = np.array([1.0, 0.0, b3, 0.0, b5])
        profiles.append(EmitterProfile(idx, b, np.asarray(memory_taps, dtype=float)))
    return profiles


def auxiliary_bank(n_emitters: int, seed: int, memory_taps=DEFAULT_MEMORY_TAPS) -> list:
    """Randomly drawn disjoint emitter profiles used for pre-training.

    b3 and b5 are uniform on [0.1, 0.5] (same family as the main bank, but a
    fresh seeded draw), b1 = 1, even orders zero.  Emitter ids continue after
    the main bank so the two sets can never collide.
    """
    if n_emitters < 1:
        raise ParameterError("n_emitters must be >= 1")
    rng = np.random.default_rng(seed)
    profiles = []
    for k in range(n_emitters):
        b3, b5 = rng.uniform(0.1, 0.5, 2)
        b = np.array([1.0, 0.0, b3, 0.0, b5])
        profiles.append(
            EmitterProfile(len(_BANK_B3_B5) + k, b, np.asarray(memory_taps, dtype=float))
        )
    return profiles


def hammerstein_apply(sig: ComplexSignal, profile: EmitterProfile) -> ComplexSignal:
    """Static polynomial then causal FIR:

        v[n] = sum_k b[k] * x[n] * |x[n]|**(k-1)
        y[n] = sum_q c[q] * v[n-q]

    Output length equals input length (the FIR tail is truncated).
    """
    x = sig.samples
    mag = np.abs(x)
    v = np.zeros_like(x)
    for k, bk in enumerate(profile.nonlinear_coeffs, start=1):
        if bk != 0.0:
            v += bk * x * mag ** (k - 1)
    y = np.convolve(v, profile.memory_taps)[: x.size]
    out = sig.with_samples(y)
    out.meta["emitter_id"] = profile.emitter_id
    return out


def volterra_apply(sig: ComplexSignal, kernels: VolterraKernels) -> ComplexSignal:
    """Brute-force finite Volterra series:

        y[n] = sum_k sum_{q1..qk} h_k[q1..qk] * prod_j x[n-q_j]

    Exponential in kernel order; intended for small reference kernels only.
    """
    x = sig.samples
    n = x.size
    y = np.zeros(n, dtype=complex)
    for h in kernels.kernels:
        if h.size == 0:
            continue
        depth = h.shape[0]
        if depth > n:
            raise ParameterError(
                f"kernel depth {depth} exceeds signal length {n}"
            )
        shifted = np.zeros((depth, n), dtype=complex)
        for q in range(depth):
            shifted[q, q:] = x[: n - q]
        for idx in np.ndindex(h.shape):
            coeff = h[idx]
            if coeff == 0:
                continue
            term = np.ones(n, dtype=complex)
            for q in idx:
                term = term * shifted[q]
            y += coeff * term
    return sig.with_samples(y)


def hammerstein_as_volterra(profile: EmitterProfile) -> VolterraKernels:
    """Expand a Hammerstein profile with b = [b1, 0, b3] into explicit kernels.

    Only orders 1 and 3 are expanded (enough for cross-checking); for a real
    input x the cubic envelope term x|x|^2 equals x^3, so the order-3 kernel is
    the separable product c[q] * b3 placed on the diagonal.
    """
    b = profile.nonlinear_coeffs
    if b.size > 3 and np.any(b[3:] != 0):
        raise ParameterError("expansion helper only covers orders up to 3")
    if b.size > 1 and b[1] != 0:
        raise ParameterError("expansion helper expects zero even-order coefficients")
    c = profile.memory_taps
    q = c.size
    h1 = b[0] * c.astype(complex)
    kernels = [h1]
    if b.size >= 3 and b[2] != 0:
        h3 = np.zeros((q, q, q), dtype=complex)
        for i in range(q):
            h3[i, i, i] = b[2] * c[i]
        kernels.append(np.zeros((q, q), dtype=complex))
        kernels.append(h3)
    return VolterraKernels(tuple(kernels))
