"""Deterministic random-number streams and the samplers shared by every simulation module.

Streams are keyed by (base_seed, stream_id) so that replicate-level work can run
on any number of workers and still produce identical output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

# Smallest representable nudges away from {0, 1}; samples are clamped into the
# open interval so downstream logs and divisions never see an exact endpoint.
_OPEN_LO = np.nextafter(0.0, 1.0)
_OPEN_HI = np.nextafter(1.0, 0.0)


def _derive_stream_id(stream_id: int, tag) -> int:
    """Stable 63-bit id for a substream; independent of process hash seeds."""
    h = hashlib.blake2s(digest_size=8)
    h.update(repr((int(stream_id), tag)).encode())
    return int.from_bytes(h.digest(), "little") >> 1


class RngStream:
    """A reproducible random stream keyed by (base_seed, stream_id).

    Identical keys give identical sequences on every platform and run.
    Distinct stream ids give statistically independent streams.  A stream is
    single-consumer: never share one instance across concurrent callers.
    """

    def __init__(self, base_seed: int, stream_id: int = 0):
        self.base_seed = int(base_seed)
        self.stream_id = int(stream_id)
        self.gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.base_seed, self.stream_id]))
        )

    def substream(self, tag) -> "RngStream":
        """Fresh independent stream derived from this stream's key and a tag."""
        return RngStream(self.base_seed, _derive_stream_id(self.stream_id, tag))

    def uniform(self, size=None):
        return self.gen.random(size)

    def __repr__(self):
        return f"RngStream(base_seed={self.base_seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta parameters must be positive, got {self}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError(f"Gamma parameters must be positive, got {self}")


def sample_gamma(stream: RngStream, p: GammaParams, size=None):
    """Gamma(shape, rate) draw(s); non-integer shapes (including <1) supported."""
    return stream.gen.gamma(p.shape, 1.0 / p.rate, size)


def sample_beta(stream: RngStream, p: BetaParams, size=None):
    """Beta(alpha, beta) draw(s) via two Gamma draws, clamped into (0, 1)."""
    g1 = stream.gen.gamma(p.alpha, 1.0, size)
    g2 = stream.gen.gamma(p.beta, 1.0, size)
    return np.clip(g1 / (g1 + g2), _OPEN_LO, _OPEN_HI)


def sample_beta_sequence(stream: RngStream, alphas, betas):
    """Independent Beta draws with per-entry parameters (the urn schedules)."""
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if np.any(alphas <= 0) or np.any(betas <= 0):
        raise ValueError("Beta parameters must be positive")
    g1 = stream.gen.gamma(alphas)
    g2 = stream.gen.gamma(betas)
    return np.clip(g1 / (g1 + g2), _OPEN_LO, _OPEN_HI)


def sample_mixed_poisson(stream: RngStream, intensity, size=None):
    """Poisson draw(s) at a caller-supplied realized intensity."""
    if np.any(np.asarray(intensity) < 0):
        raise ValueError("Poisson intensity must be nonnegative")
    return stream.gen.poisson(intensity, size)


@dataclass(frozen=True)
class OutDegreeLaw:
    """Positive-integer out-degree law: fixed(m), shifted-geometric(p) or
    truncated-zeta(s, cap).  All three have a finite p-th moment for some p>1.
    """

    kind: str
    m: int = 0
    success: float = 0.0
    exponent: float = 0.0
    cap: int = 0
    _zeta_cdf: tuple = field(default=None, repr=False, compare=False)

    @staticmethod
    def fixed(m: int) -> "OutDegreeLaw":
        if m < 1:
            raise ValueError("fixed out-degree must be >= 1")
        return OutDegreeLaw(kind="fixed", m=int(m))

    @staticmethod
    def shifted_geometric(success: float) -> "OutDegreeLaw":
        if not 0 < success <= 1:
            raise ValueError("success probability must be in (0, 1]")
        return OutDegreeLaw(kind="shifted_geometric", success=float(success))

    @staticmethod
    def truncated_zeta(exponent: float, cap: int = 10**6) -> "OutDegreeLaw":
        if exponent <= 2:
            raise ValueError("zeta exponent must exceed 2 for a finite mean")
        if cap < 1:
            raise ValueError("cap must be >= 1")
        return OutDegreeLaw(kind="truncated_zeta", exponent=float(exponent), cap=int(cap))

    @staticmethod
    def parse(text: str) -> "OutDegreeLaw":
        """Parse 'fixed:2', 'geom:0.5' or 'zeta:3.5[:cap]'."""
        parts = text.split(":")
        if parts[0] == "fixed":
            return OutDegreeLaw.fixed(int(parts[1]))
        if parts[0] in ("geom", "shifted-geometric"):
            return OutDegreeLaw.shifted_geometric(float(parts[1]))
        if parts[0] in ("zeta", "truncated-zeta"):
            cap = int(parts[2]) if len(parts) > 2 else 10**6
            return OutDegreeLaw.truncated_zeta(float(parts[1]), cap)
        raise ValueError(f"unknown out-degree law {text!r}")

    def spec(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.m}"
        if self.kind == "shifted_geometric":
            return f"geom:{self.success}"
        return f"zeta:{self.exponent}:{self.cap}"

    @property
    def is_fixed(self) -> bool:
        return self.kind == "fixed"

    def mean(self) -> float:
        if self.kind == "fixed":
            return float(self.m)
        if self.kind == "shifted_geometric":
            return 1.0 / self.success
        ks, pmf = self._zeta_table()
        return float(np.dot(ks, pmf))

    def min_support(self) -> int:
        return self.m if self.kind == "fixed" else 1

    def tail_exponent(self) -> float:
        """Power-law exponent of the law itself; inf for light tails."""
        return self.exponent if self.kind == "truncated_zeta" else math.inf

    def pmf(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=int))
        out = np.zeros(k.shape, dtype=float)
        if self.kind == "fixed":
            out[k == self.m] = 1.0
        elif self.kind == "shifted_geometric":
            ok = k >= 1
            out[ok] = self.success * (1 - self.success) ** (k[ok] - 1)
        else:
            ks, pmf = self._zeta_table()
            ok = (k >= 1) & (k <= self.cap)
            out[ok] = pmf[k[ok] - 1]
        return out

    def _zeta_table(self):
        tbl = object.__getattribute__(self, "_zeta_cdf")
        if tbl is None:
            ks = np.arange(1, self.cap + 1, dtype=float)
            w = ks ** (-self.exponent)
            pmf = w / w.sum()
            tbl = (ks, pmf, np.cumsum(pmf))
            object.__setattr__(self, "_zeta_cdf", tbl)
        return tbl[0], tbl[1]

    def sample(self, stream: RngStream, size=None):
        if self.kind == "fixed":
            return self.m if size is None else np.full(size, self.m, dtype=np.int64)
        if self.kind == "shifted_geometric":
            draw = stream.gen.geometric(self.success, size)
            return int(draw) if size is None else draw
        self._zeta_table()
        cdf = object.__getattribute__(self, "_zeta_cdf")[2]
        u = stream.gen.random(size)
        draw = np.searchsorted(cdf, u, side="right") + 1
        return int(draw) if size is None else draw.astype(np.int64)


def sample_out_degree_law(stream: RngStream, law: OutDegreeLaw, size=None):
    """I.i.d. draw(s) from the configured out-degree law."""
    return law.sample(stream, size)
