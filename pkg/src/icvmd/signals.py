"""Complex baseband signal container and channel-level operations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ParameterError


def _as_complex_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.complex128)
    if arr.ndim != 1:
        raise ParameterError(f"samples must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ParameterError("samples must be non-empty")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ParameterError("samples must be finite")
    return arr


@dataclass(frozen=True)
class ComplexSignal:
    """An immutable 1-D complex128 sample sequence with its sample rate.

    ``sample_rate`` is in Hz; all synthesis code works in normalized
    cycles/sample, so 1.0 is the usual value.
    """

    samples: np.ndarray
    sample_rate: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = _as_complex_samples(self.samples)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not (self.sample_rate > 0 and np.isfinite(self.sample_rate)):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def power(self) -> float:
        """Mean squared magnitude of the samples."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate, dict(self.meta))


def normalize_power(sig: ComplexSignal, target_power: float = 1.0) -> ComplexSignal:
    """Rescale so the mean squared magnitude equals ``target_power``.

    Raises DegenerateInputError on an all-zero signal, ParameterError on a
    non-positive target.
    """
    if not (target_power > 0 and np.isfinite(target_power)):
        raise ParameterError(f"target_power must be positive, got {target_power}")
    p = sig.power
    if p <= 0.0:
        raise DegenerateInputError("cannot normalize an all-zero signal")
    return sig.with_samples(sig.samples * np.sqrt(target_power / p))


def add_awgn(sig: ComplexSignal, snr_db: float, seed: int) -> ComplexSignal:
    """Add circular complex white Gaussian noise at the requested SNR.

    The noise variance per complex sample is ``signal_power / 10**(snr_db/10)``,
    split equally between the real and imaginary parts.  Same ``seed`` in,
    same noise out.
    """
    if not np.isfinite(snr_db):
        raise ParameterError(f"snr_db must be finite, got {snr_db}")
    p = sig.power
    if p <= 0.0:
        raise DegenerateInputError("SNR is undefined for an all-zero signal")
    noise_var = p / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    scale = np.sqrt(noise_var / 2.0)
    n = sig.samples.size
    noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return sig.with_samples(sig.samples + noise)
