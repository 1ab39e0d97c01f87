"""Complex-exponential signal synthesis, noise models, and sampled-sequence products.

Frequencies are expressed in cycles/sample at every public interface and
converted to radians (``nu = 2*pi*cycles``) internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

TWO_PI = 2.0 * math.pi

# Residual imaginary part tolerated (and zeroed) when a conjugate-symmetric
# spec is synthesized.
REAL_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class ComplexSeries:
    """A finite complex sample sequence anchored at an integer start index."""

    samples: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        samples = np.atleast_1d(np.asarray(self.samples, dtype=np.complex128))
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("a series must hold at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("series samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def is_real(self) -> bool:
        """True when every sample has an exactly zero imaginary part."""
        return bool(np.all(self.samples.imag == 0.0))


@dataclass(frozen=True)
class SignalSpec:
    """Sum-of-complex-exponentials description: terms are (cycles, amplitude).

    ``real_valued`` asserts conjugate symmetry: every term (c, a) with c != 0
    must be mirrored by (-c, conj(a)), and any zero-frequency amplitude must
    be real.  Such specs synthesize real series.
    """

    terms: tuple[tuple[float, complex], ...]
    real_valued: bool = False

    def __post_init__(self):
        terms = tuple((float(c), complex(a)) for c, a in self.terms)
        if not terms:
            raise ValueError("signal spec needs at least one term")
        cycles = [c for c, _ in terms]
        for c in cycles:
            if not -0.5 < c <= 0.5:
                raise ValueError(f"frequency {c} outside (-0.5, 0.5] cycles/sample")
        if len(set(cycles)) != len(cycles):
            raise ValueError("duplicate frequencies in signal spec")
        if self.real_valued:
            by_freq = dict(terms)
            for c, a in terms:
                if c == 0.0:
                    if a.imag != 0.0:
                        raise ValueError("zero-frequency amplitude must be real")
                elif by_freq.get(-c) != a.conjugate():
                    raise ValueError(f"missing conjugate partner for frequency {c}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_cosines(cls, cycles, amplitudes=None, constant=0.0) -> "SignalSpec":
        """Real signal of cosines: sum_i a_i*cos(2*pi*c_i*k) plus a constant."""
        cycles = list(cycles)
        if amplitudes is None:
            amplitudes = [1.0] * len(cycles)
        terms = []
        for c, a in zip(cycles, amplitudes):
            terms.append((c, a / 2.0))
            terms.append((-c, a / 2.0))
        if constant:
            terms.append((0.0, complex(constant)))
        return cls(tuple(terms), real_valued=True)


@dataclass(frozen=True)
class NoiseSpec:
    """Scaled stationary Gaussian noise: white or autoregressive of order 1/2.

    ``phi`` holds the AR coefficients (empty for white noise); the emitted
    series is ``epsilon * w`` where w has Gaussian innovations of variance
    ``innovation_variance``.  Innovations are real by default;
    ``complex_circular`` switches to circularly-symmetric complex ones of the
    same variance.  Generation is reproducible from ``seed`` (a numpy PCG64
    stream).
    """

    kind: str
    phi: tuple[float, ...] = ()
    innovation_variance: float = 1.0
    epsilon: float = 1.0
    seed: int = 0
    complex_circular: bool = False

    def __post_init__(self):
        phi = tuple(float(p) for p in self.phi)
        expected = {"white": 0, "ar1": 1, "ar2": 2}
        if self.kind not in expected:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if len(phi) != expected[self.kind]:
            raise ValueError(f"{self.kind} noise needs {expected[self.kind]} coefficients")
        if self.kind == "ar1" and abs(phi[0]) >= 1.0:
            raise ValueError("AR(1) requires |phi1| < 1 for stationarity")
        if self.kind == "ar2":
            p1, p2 = phi
            if not (abs(p2) < 1.0 and p1 + p2 < 1.0 and p2 - p1 < 1.0):
                raise ValueError("AR(2) coefficients outside the stationarity triangle")
        if self.innovation_variance <= 0.0:
            raise ValueError("innovation variance must be positive")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed: int) -> "NoiseSpec":
        return replace(self, seed=int(seed))

    @classmethod
    def white(cls, variance=1.0, epsilon=1.0, seed=0):
        return cls("white", (), variance, epsilon, seed)

    @classmethod
    def ar1(cls, phi1, variance=1.0, epsilon=1.0, seed=0):
        return cls("ar1", (phi1,), variance, epsilon, seed)

    @classmethod
    def ar2(cls, phi1, phi2, variance=1.0, epsilon=1.0, seed=0):
        return cls("ar2", (phi1, phi2), variance, epsilon, seed)


def synthesize_signal(spec: SignalSpec, m: int) -> ComplexSeries:
    """Evaluate s(k) = sum_j a_j exp(2i*pi*c_j*k) for k = 0..m-1."""
    if m < 1:
        raise ValueError("m must be at least 1")
    k = np.arange(m)
    s = np.zeros(m, dtype=np.complex128)
    for cyc, amp in spec.terms:
        s += amp * np.exp(1j * TWO_PI * cyc * k)
    if spec.real_valued:
        resid = float(np.max(np.abs(s.imag))) if m else 0.0
        if resid > REAL_RESIDUAL_TOL * max(1.0, float(np.max(np.abs(s.real)))):
            raise ValueError("conjugate-symmetric spec produced a complex series")
        s = s.real.astype(np.complex128)
    return ComplexSeries(s)


def _ar_warmup(phi: tuple[float, ...]) -> int:
    # Burn-in long enough to forget the zero initial state; scaled by how
    # close the slowest pole sits to the unit circle.
    poles = np.roots(np.concatenate(([1.0], -np.asarray(phi))))
    rho = float(np.max(np.abs(poles))) if poles.size else 0.0
    return max(500, int(math.ceil(50.0 / max(1.0 - rho, 1e-6))))


def generate_noise(spec: NoiseSpec, m: int) -> ComplexSeries:
    """Draw ``epsilon * w`` with w the requested stationary Gaussian process."""
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(spec.seed)
    scale = math.sqrt(spec.innovation_variance)

    def draw(count: int) -> np.ndarray:
        if spec.complex_circular:
            re_im = rng.standard_normal((2, count)) / math.sqrt(2.0)
            return (re_im[0] + 1j * re_im[1]) * scale
        return rng.standard_normal(count) * scale

    if spec.kind == "white":
        w = draw(m)
    else:
        warmup = _ar_warmup(spec.phi)
        a = np.concatenate(([1.0], -np.asarray(spec.phi)))
        w = lfilter([1.0], a, draw(warmup + m))[warmup:]
    return ComplexSeries((spec.epsilon * w).astype(np.complex128))


def inner_product(f: ComplexSeries, g: ComplexSeries) -> complex:
    """Length-normalized product (1/l) * sum_k f(k) * conj(g(k))."""
    if len(f) != len(g):
        raise ValueError("inner product requires equal lengths")
    return complex(np.vdot(g.samples, f.samples) / len(f))


def norm(f: ComplexSeries) -> float:
    """sqrt of the normalized energy (1/l) * sum |f(k)|^2."""
    return float(np.linalg.norm(f.samples) / math.sqrt(len(f)))


def snr_db(s: ComplexSeries, w: ComplexSeries) -> float:
    """10*log10 of the signal-to-noise energy ratio of two aligned series."""
    if len(s) != len(w):
        raise ValueError("SNR requires equal lengths")
    wn = norm(w)
    if wn == 0.0:
        raise ValueError("noise series is identically zero (infinite SNR)")
    return 20.0 * math.log10(norm(s) / wn)
