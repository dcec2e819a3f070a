"""Two-sided decomposition of complex signals with mode partitioning.

Pipeline: split the complex input into two real sequences (positive- and
negative-frequency halves), run the real-signal mode decomposition on each
side independently, then label every mode so downstream code can select the
intentional-modulation content, the distortion features, near-DC content, or
flagged special bands, and rebuild a complex signal from any selection.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import (
    DcConvention,
    analytic_split,
    boundary_correction,
    combine_analytic,
)
from .errors import DegenerateInputError, ParameterError
from .signals import ComplexSignal
from .vmd import ModeSet, VmdConfig, VmdResult, vmd_decompose


class ModeLabel(enum.Enum):
    SIGNAL = "signal"  # intentional modulation content
    FEATURE = "feature"  # residual distortion bands (the fingerprint carriers)
    DC = "dc"  # near-zero-frequency content kept out of both groups
    SPECIAL = "special"  # energy inside a user-flagged band (e.g. near Nyquist)


class Selection(enum.Enum):
    """What reconstruct() may sum, besides explicit labels."""

    RESIDUAL = "residual"


class DcPolicy(enum.Enum):
    MERGE_INTO_SIGNAL = "merge_into_signal"
    SEPARATE = "separate"
    DROP = "drop"


@dataclass(frozen=True)
class PartitionPolicy:
    """How modes of each side get labeled.

    n_signal_modes     -- per side, how many of the strongest non-DC,
                          non-special modes count as intentional signal
    dc_policy          -- MERGE_INTO_SIGNAL labels the near-DC mode as signal;
                          SEPARATE and DROP both label it DC (DROP only differs
                          at selection time: callers simply do not select DC)
    special_window     -- (low, high] band in radians; modes centered there
                          with enough energy are labeled SPECIAL
    special_energy_min -- minimum fraction of the side's input energy a mode
                          needs to qualify as SPECIAL
    """

    n_signal_modes: int = 1
    dc_policy: DcPolicy = DcPolicy.SEPARATE
    special_window: tuple = (0.9 * math.pi, math.pi)
    special_energy_min: float = 0.05

    def __post_init__(self):
        if self.n_signal_modes < 0:
            raise ParameterError("n_signal_modes must be >= 0")
        lo, hi = self.special_window
        if not (0.0 <= lo < hi <= math.pi):
            raise ParameterError(
                f"special_window must satisfy 0 <= low < high <= pi, got {self.special_window}"
            )
        if not (0.0 <= self.special_energy_min <= 1.0):
            raise ParameterError("special_energy_min must lie in [0, 1]")
        if not isinstance(self.dc_policy, DcPolicy):
            raise ParameterError(f"dc_policy must be a DcPolicy, got {self.dc_policy!r}")


@dataclass(frozen=True)
class IcvmdConfig:
    pos: VmdConfig = field(default_factory=VmdConfig)
    neg: VmdConfig = field(default_factory=VmdConfig)
    partition: PartitionPolicy = field(default_factory=PartitionPolicy)
    dc_convention: DcConvention = DcConvention.DC_TO_POSITIVE


@dataclass(frozen=True)
class IcvmdResult:
    """Everything needed to select, inspect, or rebuild: per-side mode sets,
    labels, residuals, and the boundary-bin amplitudes the split cannot carry."""

    pos: VmdResult
    neg: VmdResult
    labels_pos: tuple
    labels_neg: tuple
    dc_imag: float
    nyquist_imag: float
    sample_rate: float = 1.0

    @property
    def n_samples(self) -> int:
        return self.pos.modes.shape[1]

    def side(self, name: str) -> VmdResult:
        if name == "pos":
            return self.pos
        if name == "neg":
            return self.neg
        raise ParameterError(f"side must be 'pos' or 'neg', got {name!r}")


def _mode_energies(result: VmdResult) -> np.ndarray:
    return np.sum(result.modes**2, axis=1)


def _side_input_energy(result: VmdResult) -> float:
    side_input = result.modes.sum(axis=0) + result.residual
    return float(np.sum(side_input**2))


def partition_modes(result: VmdResult, policy: PartitionPolicy) -> tuple:
    """Label each mode of one side per the policy.  Order of precedence:
    near-DC first, then the special window, then the energy ranking that
    splits signal from feature.
    """
    k = result.modes.shape[0]
    energies = _mode_energies(result)
    total = max(_side_input_energy(result), 1e-300)
    fractions = energies / total
    n_bins = result.mode_set.mode_spectra.shape[1]
    grid_step = math.pi / (n_bins - 1)
    omegas = result.omegas

    labels: list = [None] * k
    for i in range(k):
        if omegas[i] < grid_step:
            labels[i] = (
                ModeLabel.SIGNAL
                if policy.dc_policy is DcPolicy.MERGE_INTO_SIGNAL
                else ModeLabel.DC
            )
    lo, hi = policy.special_window
    for i in range(k):
        if labels[i] is None and lo < omegas[i] <= hi and fractions[i] >= policy.special_energy_min:
            labels[i] = ModeLabel.SPECIAL

    remaining = [i for i in range(k) if labels[i] is None]
    if policy.n_signal_modes > len(remaining):
        raise ParameterError(
            f"policy wants {policy.n_signal_modes} signal modes but only "
            f"{len(remaining)} modes are left after DC/special labeling"
        )
    ranked = sorted(remaining, key=lambda i: (-energies[i], i))
    for rank, i in enumerate(ranked):
        labels[i] = ModeLabel.SIGNAL if rank < policy.n_signal_modes else ModeLabel.FEATURE
    return tuple(labels)


def icvmd_decompose(sig: ComplexSignal, cfg: IcvmdConfig) -> IcvmdResult:
    """Split, decompose each side independently, and label the modes.

    A side whose sequence is numerically all-zero (e.g. a purely positive-
    frequency input) still yields a result: its modes are all zero and all
    labeled FEATURE, with the residual carrying nothing.
    """
    pair = analytic_split(sig, cfg.dc_convention)
    # A side holding only FFT roundoff from the split (e.g. the negative side
    # of a purely positive-frequency input) is treated as empty rather than
    # decomposed: its "modes" would be arbitrary slices of numerical noise.
    input_energy = float(np.sum(np.abs(sig.samples) ** 2))
    results = {}
    labels = {}
    for name, x, side_cfg in (
        ("pos", pair.x_plus, cfg.pos),
        ("neg", pair.x_minus, cfg.neg),
    ):
        side_degenerate = float(np.sum(x**2)) <= 1e-24 * input_energy
        try:
            if side_degenerate:
                raise DegenerateInputError("side carries no energy")
            res = vmd_decompose(x, side_cfg)
        except DegenerateInputError:
            n = x.size
            n_bins = n + 1  # rfft bins of the mirror-extended (2n) sequence
            res = VmdResult(
                modes=np.zeros((side_cfg.n_modes, n)),
                mode_set=ModeSet(
                    mode_spectra=np.zeros((side_cfg.n_modes, n_bins), dtype=complex),
                    omegas=np.zeros(side_cfg.n_modes),
                    lambda_spectrum=np.zeros(n_bins, dtype=complex),
                    iterations=0,
                    converged=True,
                    final_delta=0.0,
                ),
                residual=np.zeros(n),
            )
            results[name] = res
            labels[name] = tuple([ModeLabel.FEATURE] * side_cfg.n_modes)
            continue
        results[name] = res
        labels[name] = partition_modes(res, cfg.partition)

    return IcvmdResult(
        pos=results["pos"],
        neg=results["neg"],
        labels_pos=labels["pos"],
        labels_neg=labels["neg"],
        dc_imag=pair.dc_imag,
        nyquist_imag=pair.nyquist_imag,
        sample_rate=sig.sample_rate,
    )


def _select_side(result: VmdResult, labels, selection) -> np.ndarray:
    out = np.zeros(result.modes.shape[1])
    for mode, label in zip(result.modes, labels):
        if label in selection:
            out = out + mode
    if Selection.RESIDUAL in selection:
        out = out + result.residual
    return out


def reconstruct(result: IcvmdResult, selection) -> ComplexSignal:
    """Rebuild a complex signal from the selected labels.

    ``selection`` is an iterable of ModeLabel and/or Selection.RESIDUAL.
    Selecting every label plus RESIDUAL reproduces the original input (the
    boundary-bin correction rides with RESIDUAL).  An empty selection yields
    an all-zero signal.
    """
    selection = frozenset(selection)
    allowed = set(ModeLabel) | set(Selection)
    bad = selection - allowed
    if bad:
        raise ParameterError(f"unknown selection entries: {sorted(str(b) for b in bad)}")
    s_plus = _select_side(result.pos, result.labels_pos, selection)
    s_minus = _select_side(result.neg, result.labels_neg, selection)
    n = s_plus.size
    if not np.any(s_plus) and not np.any(s_minus):
        z = np.zeros(n, dtype=complex)
    else:
        z = combine_analytic(s_plus, s_minus)
    if Selection.RESIDUAL in selection:
        z = z + boundary_correction(n, result.dc_imag, result.nyquist_imag)
    return ComplexSignal(z, result.sample_rate)


FULL_SELECTION = frozenset(ModeLabel) | frozenset({Selection.RESIDUAL})


@dataclass(frozen=True)
class ProbeSuggestion:
    """Data-driven starting point for the solver knobs."""

    k_low: int
    k_high: int
    alpha: float
    n_peaks: int
    mean_bandwidth: float  # radians


def probe_parameters(sig: ComplexSignal) -> ProbeSuggestion:
    """Suggest a mode-count range and a bandwidth-penalty decade from a
    smoothed periodogram.

    Peaks are contiguous regions at least 6 dB above the median smoothed
    power; each contributes a 3 dB width.  The mode count brackets the peak
    count (never below the usual working range), and alpha is the decade of
    n / (4 * mean 3 dB width in radians) -- narrower structure needs a larger
    penalty to isolate it.
    """
    z = sig.samples
    n = z.size
    if n < 16:
        raise ParameterError("probe needs at least 16 samples")
    power = np.abs(np.fft.fft(z)) ** 2
    width = max(3, n // 16)
    kernel = np.ones(width) / width
    smooth = np.convolve(power, kernel, mode="same")
    floor = float(np.median(smooth))
    thresh = floor * (10.0 ** 0.6) if floor > 0 else 0.0

    above = smooth > max(thresh, 1e-300)
    # Contiguous runs of above-threshold bins.
    edges = np.flatnonzero(np.diff(above.astype(int)))
    starts = list(np.flatnonzero(np.diff(np.concatenate([[0], above.astype(int)])) == 1))
    ends = list(np.flatnonzero(np.diff(np.concatenate([above.astype(int), [0]])) == -1))
    regions = list(zip(starts, ends))

    bandwidths = []
    for s, e in regions:
        seg = smooth[s : e + 1]
        peak = float(seg.max())
        half = peak / 2.0
        idx = np.flatnonzero(seg >= half)
        n_bins = idx[-1] - idx[0] + 1
        bandwidths.append(n_bins * 2.0 * np.pi / n)

    n_peaks = len(regions)
    mean_bw = float(np.mean(bandwidths)) if bandwidths else math.pi
    k_low = max(n_peaks, 5)
    k_high = max(n_peaks + 2, 8)
    alpha_raw = n / (4.0 * mean_bw)
    alpha = float(10.0 ** round(math.log10(alpha_raw))) if alpha_raw > 0 else 1000.0
    return ProbeSuggestion(
        k_low=k_low, k_high=k_high, alpha=alpha, n_peaks=n_peaks, mean_bandwidth=mean_bw
    )


def dump_modes(result: IcvmdResult, out_dir) -> dict:
    """Write every mode (and the two residuals) as iqf32 files plus one JSON manifest.

    Each mode is a real sequence; it is stored with a zero quadrature channel.
    The manifest records side, center frequency, energy fraction, and label for
    every file, plus the boundary-bin amplitudes, so a complex signal can be
    rebuilt from the dump alone.
    """
    from .iqfile import write_iqf32

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for side_name, side, labels in (
        ("pos", result.pos, result.labels_pos),
        ("neg", result.neg, result.labels_neg),
    ):
        energies = _mode_energies(side)
        total = max(_side_input_energy(side), 1e-300)
        for k in range(side.modes.shape[0]):
            fname = f"mode_{side_name}_{k:02d}.iqf32"
            write_iqf32(out_dir / fname, side.modes[k].astype(complex))
            entries.append(
                {
                    "file": fname,
                    "side": side_name,
                    "index": k,
                    "omega": float(side.omegas[k]),
                    "energy_fraction": float(energies[k] / total),
                    "label": labels[k].value,
                }
            )
        write_iqf32(out_dir / f"residual_{side_name}.iqf32", side.residual.astype(complex))
    manifest = {
        "schema_version": 1,
        "n_samples": result.n_samples,
        "sample_rate": result.sample_rate,
        "dc_imag": result.dc_imag,
        "nyquist_imag": result.nyquist_imag,
        "residuals": {"pos": "residual_pos.iqf32", "neg": "residual_neg.iqf32"},
        "modes": entries,
    }
    (out_dir / "modes.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def reconstruct_from_dump(dump_dir, selection) -> ComplexSignal:
    """Rebuild a complex signal from a dump_modes() directory.

    Lossy float32 storage aside, selecting everything plus RESIDUAL reproduces
    the originally decomposed signal.
    """
    from .iqfile import read_iqf32

    dump_dir = Path(dump_dir)
    manifest_path = dump_dir / "modes.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no modes.json in {dump_dir}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema_version") != 1:
        raise ParameterError("unsupported modes.json schema_version")
    selection = frozenset(selection)
    allowed = set(ModeLabel) | set(Selection)
    if selection - allowed:
        raise ParameterError(f"unknown selection entries: {sorted(map(str, selection - allowed))}")

    n = int(manifest["n_samples"])
    sides = {"pos": np.zeros(n), "neg": np.zeros(n)}
    for entry in manifest["modes"]:
        if ModeLabel(entry["label"]) in selection:
            sides[entry["side"]] = sides[entry["side"]] + read_iqf32(
                dump_dir / entry["file"], with_sidecar=False
            ).samples.real
    if Selection.RESIDUAL in selection:
        for side_name, fname in manifest["residuals"].items():
            sides[side_name] = sides[side_name] + read_iqf32(
                dump_dir / fname, with_sidecar=False
            ).samples.real
    if not np.any(sides["pos"]) and not np.any(sides["neg"]):
        z = np.zeros(n, dtype=complex)
    else:
        z = combine_analytic(sides["pos"], sides["neg"])
    if Selection.RESIDUAL in selection:
        z = z + boundary_correction(n, manifest["dc_imag"], manifest["nyquist_imag"])
    return ComplexSignal(z, float(manifest.get("sample_rate", 1.0)))
