"""Spectral and correlation models of flows.

A spectral model is a probability measure on the frequency line (finitely
many atoms plus an optional bounded piecewise-constant density); it carries
the unitary action of a flow on one cyclic subspace, and its transform

    rho(t) = Int e^{i r t} dsigma(r)

is the correlation function of the cyclic vector.  Correlation models come
in three flavours: the closed-form box autocorrelation of a winding, the
transform of a spectral model, and a synthetic spike profile (a baseline
plus narrow triangular bumps at sparsely spaced centers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import BoxSet, TorusWinding, arc_correlation
from .quadrature import adaptive_gl, oscillation_cells

_MASS_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyBand:
    """Piecewise-constant spectral density over [lo, hi] carrying ``mass``.

    ``profile`` lists relative cell weights (normalized internally); a
    single-entry profile is a flat band.
    """

    lo: float
    hi: float
    mass: float
    profile: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("band needs lo < hi")
        if self.mass <= 0:
            raise ValueError("band mass must be positive")
        if any(v < 0 for v in self.profile) or sum(self.profile) <= 0:
            raise ValueError("band profile must be nonnegative with positive sum")

    def density(self, r):
        """Density value at frequencies ``r`` (zero outside the band)."""
        r = np.asarray(r, dtype=float)
        prof = np.asarray(self.profile, dtype=float)
        cellw = (self.hi - self.lo) / len(prof)
        scale = self.mass / (prof.sum() * cellw)
        idx = np.clip(((r - self.lo) / cellw).astype(int), 0, len(prof) - 1)
        inside = (r >= self.lo) & (r <= self.hi)
        return np.where(inside, prof[idx] * scale, 0.0)


@dataclass(frozen=True)
class SpectralModel:
    """Probability measure on frequencies: atoms plus an optional band."""

    atoms: tuple[tuple[float, float], ...] = ()
    band: FrequencyBand | None = None

    def __post_init__(self):
        if any(m <= 0 for _, m in self.atoms):
            raise ValueError("atom masses must be positive")
        total = sum(m for _, m in self.atoms) + (self.band.mass if self.band else 0.0)
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"spectral mass {total} differs from 1 beyond 1e-9")

    def correlation(self, t, tol: float = 1e-9):
        """rho(t) = sum_k m_k e^{i w_k t} + Int e^{i r t} density(r) dr."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.zeros(len(tt), dtype=complex)
        if self.atoms:
            w = np.array([w for w, _ in self.atoms])
            m = np.array([m for _, m in self.atoms])
            out += np.exp(1j * np.outer(tt, w)) @ m
        if self.band is not None:
            band = self.band
            for k, tv in enumerate(tt):
                cells = oscillation_cells(band.hi - band.lo, tv)
                val, _ = adaptive_gl(
                    lambda r: np.exp(1j * tv * r) * band.density(r),
                    band.lo, band.hi, tol, cells=cells)
                out[k] += val
        return complex(out[0]) if scalar else out

    def expect(self, fn, tol: float = 1e-8, cells: int = 2) -> float:
        """Int fn(r) dsigma(r) for a real vectorized integrand."""
        total = 0.0
        if self.atoms:
            w = np.array([w for w, _ in self.atoms])
            m = np.array([m for _, m in self.atoms])
            total += float(fn(w) @ m)
        if self.band is not None:
            band = self.band
            val, _ = adaptive_gl(lambda r: fn(r) * band.density(r),
                                 band.lo, band.hi, tol, cells=cells)
            total += val.real
        return total


def lebesgue_band(lo: float = -1.0, hi: float = 1.0) -> SpectralModel:
    return SpectralModel(band=FrequencyBand(lo, hi, 1.0))


# ---------------------------------------------------------------------------
# observables on the torus
# ---------------------------------------------------------------------------

class Observable:
    """A bounded function on the d-torus with a declared space mean and
    sup-norm bound; callable on point arrays of shape (..., d)."""

    mean: float
    sup_norm: float

    def __call__(self, points):
        raise NotImplementedError


class FourierObservable(Observable):
    """Finite combination sum_k c_k e^{2 pi i k.x} over integer vectors k.

    The coefficient set must be conjugate-symmetric (c_{-k} = conj(c_k)) so
    the observable is real-valued; the zero mode is excluded, so the mean
    is exactly zero.
    """

    def __init__(self, coefficients: dict[tuple[int, ...], complex]):
        if not coefficients:
            raise ValueError("need at least one coefficient")
        dims = {len(k) for k in coefficients}
        if len(dims) != 1:
            raise ValueError("all wave vectors must share one dimension")
        if any(all(v == 0 for v in k) for k in coefficients):
            raise ValueError("zero-mean contract: the constant mode is not allowed")
        for k, c in coefficients.items():
            mirror = tuple(-v for v in k)
            if mirror not in coefficients or abs(np.conj(c) - coefficients[mirror]) > 1e-12:
                raise ValueError("coefficients must be conjugate-symmetric (real observable)")
        self.coefficients = {tuple(k): complex(c) for k, c in sorted(coefficients.items())}
        self.dimension = dims.pop()
        self._K = np.array(list(self.coefficients.keys()), dtype=float)
        self._C = np.array(list(self.coefficients.values()))
        self.mean = 0.0
        self.sup_norm = float(np.sum(np.abs(self._C)))
        self.l2_norm = float(np.sqrt(np.sum(np.abs(self._C) ** 2)))

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        phases = np.exp(2j * np.pi * (pts @ self._K.T))
        return np.real(phases @ self._C)


def cos_mode(dimension: int, axis: int) -> FourierObservable:
    """sqrt(2) * cos(2 pi x_axis): zero mean, unit L2 norm."""
    k = tuple(1 if j == axis else 0 for j in range(dimension))
    mk = tuple(-v for v in k)
    c = 1.0 / np.sqrt(2.0)
    return FourierObservable({k: c + 0j, mk: c + 0j})


class BoxIndicator(Observable):
    """Indicator of a box set; mean is the box volume."""

    def __init__(self, box: BoxSet):
        self.box = box
        self.mean = box.volume
        self.sup_norm = 1.0

    def __call__(self, points):
        return self.box.contains(points).astype(float)


def spectrum_of_observable(flow: TorusWinding, obs: FourierObservable,
                           merge_tol: float = 1e-12) -> SpectralModel:
    """Spectral measure of the cyclic subspace of ``obs``: one atom of mass
    |c_k|^2 at frequency 2 pi k.alpha, equal frequencies merged.  Requires
    unit L2 norm so the result is a probability measure."""
    if obs.dimension != flow.dimension:
        raise ValueError("observable dimension must match the winding")
    if abs(obs.l2_norm - 1.0) > 1e-9:
        raise ValueError("observable must have unit L2 norm")
    alpha = np.asarray(flow.alpha)
    freqs = 2.0 * np.pi * (obs._K @ alpha)
    masses = np.abs(obs._C) ** 2
    order = np.argsort(freqs)
    merged: list[list[float]] = []
    for w, m in zip(freqs[order], masses[order]):
        if merged and abs(w - merged[-1][0]) <= merge_tol:
            merged[-1][1] += m
        else:
            merged.append([float(w), float(m)])
    return SpectralModel(atoms=tuple((w, m) for w, m in merged))


# ---------------------------------------------------------------------------
# correlation models
# ---------------------------------------------------------------------------

class CorrelationModel:
    """Correlation function rho(t); ``value`` is vectorized over t."""

    def value(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class BoxAutocorrelation(CorrelationModel):
    """rho(t) = mu(A intersect T_t A) for a box set A of a winding."""

    flow: TorusWinding
    box: BoxSet

    def value(self, t):
        return arc_correlation(self.flow, self.box, self.box, t)


@dataclass(frozen=True)
class BochnerCorrelation(CorrelationModel):
    """Real part of the spectral-model transform."""

    spectrum: SpectralModel

    def value(self, t):
        return np.real(self.spectrum.correlation(t))


@dataclass(frozen=True)
class SpikeCorrelation(CorrelationModel):
    """Baseline plus triangular bumps: rho(|t|) = baseline outside every
    [h_j - L_j, h_j + L_j] and baseline + height_j * (1 - |t - h_j| / L_j)
    inside.  Evaluated at |t| (correlation functions are even).

    Centers must grow: h_{j+1} / h_j >= growth for the declared growth > 1.
    Positive-definiteness is NOT enforced: this is a modeling device for
    localized deviations from mixing, not a transform of any spectral
    measure, and its apexes intentionally exceed the baseline.
    """

    baseline: float
    centers: tuple[float, ...] = ()
    halfwidths: tuple[float, ...] = ()
    heights: tuple[float, ...] = ()
    growth: float = 2.0

    def __post_init__(self):
        j = len(self.centers)
        if len(self.halfwidths) != j or len(self.heights) != j:
            raise ValueError("centers, halfwidths and heights must align")
        if self.baseline < 0:
            raise ValueError("baseline must be nonnegative")
        if not self.growth > 1.0:
            raise ValueError("declared growth factor must exceed 1")
        for h, w in zip(self.centers, self.halfwidths):
            if w <= 0 or h - w <= 0:
                raise ValueError("spikes need positive halfwidths and h - L > 0")
        for k, (h0, h1) in enumerate(zip(self.centers, self.centers[1:])):
            if h1 / h0 < self.growth * (1.0 - 1e-12):
                raise ValueError("centers must grow by at least the declared factor")
            if h0 + self.halfwidths[k] >= h1 - self.halfwidths[k + 1]:
                raise ValueError("spike intervals must be pairwise disjoint")

    def value(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.full(len(tt), self.baseline)
        if self.centers:
            h = np.asarray(self.centers)
            j = np.clip(np.searchsorted(h, tt), 0, len(h) - 1)
            jm = np.maximum(j - 1, 0)
            for cand, active in ((j, np.ones(len(tt), bool)), (jm, jm != j)):
                hw = np.asarray(self.halfwidths)[cand]
                ht = np.asarray(self.heights)[cand]
                dist = np.abs(tt - h[cand])
                bump = np.where(active & (dist < hw), ht * (1.0 - dist / hw), 0.0)
                out = out + bump
        return float(out[0]) if scalar else out


def geometric_spikes(growth: float = 10.0, halfwidth: float = 0.25,
                     height: float = 1.0, count: int = 8,
                     baseline: float = 0.25, first: float = 1.0) -> SpikeCorrelation:
    centers = tuple(first * growth ** j for j in range(count))
    return SpikeCorrelation(baseline, centers, (halfwidth,) * count,
                            (height,) * count, growth)


def arithmetic_spikes(step: float = 1.0, halfwidth: float = 0.25,
                      height: float = 1.0, count: int = 1000,
                      baseline: float = 0.25) -> SpikeCorrelation:
    """Spikes on the progression step, 2*step, ..., count*step.  The growth
    ratio of consecutive centers tends to 1, so the declared factor is the
    smallest consecutive ratio in the family."""
    centers = tuple(step * (j + 1) for j in range(count))
    growth = (count) / (count - 1.0) * (1.0 - 1e-12)
    return SpikeCorrelation(baseline, centers, (halfwidth,) * count,
                            (height,) * count, growth)
