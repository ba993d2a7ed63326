"""Monte-Carlo generator of correlated two-mode homodyne data.

Produces (theta_rel, x_a, x_b) triples distributed like joint quadrature
measurements on the lossy split single photon.  Losses are folded into the
input state as a vacuum admixture with weight (1 - eta) before the beam
splitter, so the joint density is

    P = (1-eta) G(x_a) G(x_b)
        + eta * 4 G(x_a) G(x_b) [a2 x_a^2 + b2 x_b^2
                                 - 2 sqrt(a2 b2) x_a x_b cos(theta_rel)]

with G(x) = sqrt(2/pi) exp(-2 x^2) the vacuum marginal.  Only the relative
phase theta_rel = theta_A - theta_B enters.

Sampling uses one RNG substream per sample index: substream i of a run
with 64-bit seed s is the Philox-4x64 counter block starting at i * 2**64
under key s.  Any partition of the index range over workers therefore
reproduces the identical dataset.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .fock import TwoModeEnsemble, TwoModePure, beam_splitter

GENERATOR_NAME = "philox4x64-counterblock"

# Envelope for the rejection sampler of the split-photon branch: the
# target over the N(0, 1/2 I) proposal is bounded by 8/e, since the
# polynomial factor obeys a2*xa^2 + b2*xb^2 - 2ab*xa*xb*cos <= r^2
# (Cauchy-Schwarz) and r^2 exp(-r^2) <= 1/e.
_ENVELOPE_SIGMA = np.sqrt(0.5)
_MAX_PROPOSALS = 100_000


class EnvelopeViolation(RuntimeError):
    """Rejection loop exhausted; the envelope constant is broken."""


class QuadratureSample(NamedTuple):
    theta_rel: float
    x_a: float
    x_b: float


@dataclass(frozen=True)
class PhaseSweep:
    """Phase schedule over a run: one linear 2*pi ramp, or a fixed value."""

    kind: str = "linear"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "fixed"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")

    def theta_at(self, index, n_samples: int):
        if self.kind == "fixed":
            return np.broadcast_to(float(self.value), np.shape(index)).astype(float) \
                if np.ndim(index) else float(self.value)
        return 2.0 * np.pi * np.asarray(index, dtype=float) / n_samples

    def __str__(self) -> str:
        return "linear" if self.kind == "linear" else f"fixed:{self.value!r}"

    @staticmethod
    def parse(text: str) -> "PhaseSweep":
        text = text.strip()
        if text == "linear":
            return PhaseSweep("linear")
        if text.startswith("fixed:"):
            return PhaseSweep("fixed", float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse phase sweep {text!r}")


@dataclass(frozen=True)
class SimConfig:
    alpha2: float = 0.5
    eta: float = 0.55
    n_samples: int = 300_000
    seed: int = 1
    phase_sweep: PhaseSweep = field(default_factory=PhaseSweep)
    fock_cutoff: int = 8

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0.0 < self.alpha2 < 1.0:
            raise ValueError("alpha2 must lie in (0, 1)")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


@dataclass(frozen=True)
class Dataset:
    """A simulated run: per-sample phases and quadrature pairs plus provenance."""

    theta_rel: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    alpha2: float
    eta: float
    seed: int
    generator: str = GENERATOR_NAME

    def __post_init__(self):
        for name in ("theta_rel", "x_a", "x_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.theta_rel.shape == self.x_a.shape == self.x_b.shape):
            raise ValueError("column length mismatch")

    def __len__(self) -> int:
        return self.theta_rel.size

    def __iter__(self) -> Iterator[QuadratureSample]:
        for t, a, b in zip(self.theta_rel, self.x_a, self.x_b):
            yield QuadratureSample(float(t), float(a), float(b))


def lossy_nonlocal_ensemble(alpha2: float, eta: float, cutoff: int = 8) -> TwoModeEnsemble:
    """Two-mode ensemble behind the data: eta * split photon + (1-eta) * vacuum."""
    split = beam_splitter(TwoModePure.fock(1, 0, cutoff), alpha2)
    vacuum = TwoModePure.fock(0, 0, cutoff)
    return TwoModeEnsemble(((eta, split), (1.0 - eta, vacuum)))


def joint_pdf(x_a, x_b, theta_rel, alpha2: float, eta: float):
    """Joint density of one (x_a, x_b) pair at relative phase theta_rel."""
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    gg = (2.0 / np.pi) * np.exp(-2.0 * (x_a * x_a + x_b * x_b))
    beta2 = 1.0 - alpha2
    cross = 2.0 * np.sqrt(alpha2 * beta2) * x_a * x_b * np.cos(theta_rel)
    bracket = alpha2 * x_a * x_a + beta2 * x_b * x_b - cross
    out = (1.0 - eta) * gg + eta * 4.0 * gg * bracket
    return float(out) if out.ndim == 0 else out


def sample_pair(rng: np.random.Generator, theta_rel: float, alpha2: float, eta: float):
    """Draw one (x_a, x_b) pair distributed per :func:`joint_pdf`.

    Branch choice is Bernoulli(eta): the vacuum branch is two independent
    N(0, 1/4) draws; the split-photon branch is rejection-sampled from a
    scaled N(0, 1/2 I) envelope (acceptance ~ e/8 = 0.34).
    """
    if eta > 0.0 and rng.random() < eta:
        beta2 = 1.0 - alpha2
        ab = np.sqrt(alpha2 * beta2)
        cos_t = np.cos(theta_rel)
        for _ in range(_MAX_PROPOSALS):
            x_a, x_b = rng.normal(0.0, _ENVELOPE_SIGMA, 2)
            bracket = alpha2 * x_a * x_a + beta2 * x_b * x_b - 2.0 * ab * x_a * x_b * cos_t
            # accept prob = bracket * e^(1 - r^2), bounded by 1 via r^2 e^(-r^2) <= 1/e
            if rng.random() <= bracket * np.exp(1.0 - x_a * x_a - x_b * x_b):
                return float(x_a), float(x_b)
        raise EnvelopeViolation("rejection sampler exceeded proposal budget")
    x_a, x_b = rng.normal(0.0, 0.5, 2)
    return float(x_a), float(x_b)


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 64))


def _generate_block(config: SimConfig, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, 3), dtype=float)
    sweep = config.phase_sweep
    for i in range(start, stop):
        theta = float(sweep.theta_at(i, config.n_samples))
        rng = _substream(config.seed, i)
        x_a, x_b = sample_pair(rng, theta, config.alpha2, config.eta)
        out[i - start] = (theta, x_a, x_b)
    return out


def generate_dataset(config: SimConfig, workers: int = 1) -> Dataset:
    """Simulate a full run; identical output for any worker count."""
    n = config.n_samples
    if workers <= 1 or n < 4 * workers:
        rows = _generate_block(config, 0, n)
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(
                pool.map(_generate_block, [config] * workers, edges[:-1], edges[1:])
            )
        rows = np.concatenate(blocks, axis=0)
    return Dataset(
        theta_rel=rows[:, 0],
        x_a=rows[:, 1],
        x_b=rows[:, 2],
        alpha2=config.alpha2,
        eta=config.eta,
        seed=config.seed,
    )


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


_HEADER = "theta_rel,x_a,x_b"


def write_dataset(dataset: Dataset, path) -> None:
    """Write the CSV interchange format (atomic: temp file then rename)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write(f"# alpha2={dataset.alpha2!r}\n")
        fh.write(f"# eta={dataset.eta!r}\n")
        fh.write(f"# seed={dataset.seed}\n")
        fh.write(f"# generator={dataset.generator}\n")
        fh.write(f"# n={len(dataset)}\n")
        fh.write(_HEADER + "\n")
        for t, a, b in zip(dataset.theta_rel, dataset.x_a, dataset.x_b):
            fh.write(f"{t:.9g},{a:.9g},{b:.9g}\n")
    os.replace(tmp, path)


def read_dataset(path) -> Dataset:
    """Parse a dataset CSV, validating the header and every row."""
    meta: dict[str, str] = {}
    rows: list[tuple[float, float, float]] = []
    saw_header = False
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if not saw_header:
                if line != _HEADER:
                    raise DatasetFormatError(
                        f"expected header {_HEADER!r}, got {line!r}", lineno
                    )
                saw_header = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DatasetFormatError(f"expected 3 fields, got {len(parts)}", lineno)
            try:
                rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise DatasetFormatError(str(exc), lineno) from exc
    if not saw_header:
        raise DatasetFormatError("missing column header")
    for key in ("alpha2", "eta", "seed"):
        if key not in meta:
            raise DatasetFormatError(f"missing metadata line '# {key}=...'")
    arr = np.asarray(rows, dtype=float).reshape(len(rows), 3)
    declared = meta.get("n")
    if declared is not None and int(declared) != len(rows):
        raise DatasetFormatError(f"declared n={declared} but found {len(rows)} rows")
    return Dataset(
        theta_rel=arr[:, 0],
        x_a=arr[:, 1],
        x_b=arr[:, 2],
        alpha2=float(meta["alpha2"]),
        eta=float(meta["eta"]),
        seed=int(meta["seed"]),
        generator=meta.get("generator", GENERATOR_NAME),
    )
