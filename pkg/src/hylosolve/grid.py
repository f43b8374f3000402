"""Periodic grids, discrete fields, spectral calculus, and lattice shifts.

All fields live on uniform periodic boxes in 1-3 dimensions.  Derivatives
are Fourier multipliers, so band-limited fields are differentiated exactly;
lattice translations are circular index shifts and therefore exact group
operations (no interpolation).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import GridMismatch
from .rng import SplitMix64

MAX_TOTAL_POINTS = 2**22

NLS = "NLS"
NWE = "NWE"
NBE = "NBE"
MODEL_TAGS = (NLS, NWE, NBE)

# component labels per model, in storage order
COMPONENT_NAMES = {NLS: ("psi",), NWE: ("psi", "phi"), NBE: ("u", "v")}
COMPLEX_MODELS = (NLS, NWE)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box; per-axis point counts and physical lengths."""

    n: tuple[int, ...]
    box_length: tuple[float, ...]

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        box = tuple(float(v) for v in self.box_length)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "box_length", box)
        if not 1 <= len(n) <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        if len(box) != len(n):
            raise ValueError("box_length must match n per axis")
        for ni in n:
            if not (_is_pow2(ni) and ni >= 16):
                raise ValueError(f"points per axis must be a power of two >= 16, got {ni}")
        for li in box:
            if not li > 0:
                raise ValueError("box lengths must be positive")
        if int(np.prod(n)) > MAX_TOTAL_POINTS:
            raise ValueError(f"total points {np.prod(n)} exceed {MAX_TOTAL_POINTS}")

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / ni for L, ni in zip(self.box_length, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return _axis_coordinates(self, axis)

    def coordinates(self) -> list[np.ndarray]:
        """Meshgrid (ij-indexed) coordinate arrays, one per axis."""
        axes = [self.axis_coordinates(a) for a in range(self.dim)]
        if self.dim == 1:
            return axes
        return list(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        return _axis_wavenumbers(self, axis)


@lru_cache(maxsize=64)
def _axis_coordinates(grid: Grid, axis: int) -> np.ndarray:
    x = np.arange(grid.n[axis]) * grid.spacing[axis]
    x.setflags(write=False)
    return x


@lru_cache(maxsize=64)
def _axis_wavenumbers(grid: Grid, axis: int) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n[axis], d=grid.spacing[axis])
    k.setflags(write=False)
    return k


def _axis_k_mesh(grid: Grid, axis: int) -> np.ndarray:
    k = grid.wavenumbers(axis)
    shape = [1] * grid.dim
    shape[axis] = grid.n[axis]
    return k.reshape(shape)


@lru_cache(maxsize=64)
def k_squared(grid: Grid) -> np.ndarray:
    """|k|^2 on the full spectral grid."""
    total = np.zeros(grid.n)
    for axis in range(grid.dim):
        total = total + _axis_k_mesh(grid, axis) ** 2
    total.setflags(write=False)
    return total


@dataclass(frozen=True)
class LatticeShift:
    """Translation by whole grid cells, one integer offset per axis."""

    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))

    def reduced(self, grid: Grid) -> tuple[int, ...]:
        return tuple(zi % ni for zi, ni in zip(self.z, grid.n))


class FieldState:
    """Immutable model-tagged state: one or two sampled fields on a Grid."""

    __slots__ = ("model_tag", "grid", "components")

    def __init__(self, model_tag: str, grid: Grid, components):
        if model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {model_tag!r}")
        names = COMPONENT_NAMES[model_tag]
        comps = tuple(components)
        if len(comps) != len(names):
            raise ValueError(f"{model_tag} needs {len(names)} components, got {len(comps)}")
        dtype = np.complex128 if model_tag in COMPLEX_MODELS else np.float64
        stored = []
        for c in comps:
            arr = np.asarray(c)
            if model_tag == NBE and np.iscomplexobj(arr) and np.abs(arr.imag).max() > 0:
                raise ValueError("NBE components must be real")
            arr = np.array(arr, dtype=dtype)
            if arr.shape != tuple(grid.n):
                raise ValueError(f"component shape {arr.shape} != grid {grid.n}")
            if not np.all(np.isfinite(arr.view(np.float64))):
                raise ValueError("field samples must be finite")
            arr.setflags(write=False)
            stored.append(arr)
        object.__setattr__(self, "model_tag", model_tag)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "components", tuple(stored))

    def __setattr__(self, name, value):
        raise AttributeError("FieldState is immutable")

    # named accessors
    @property
    def psi(self) -> np.ndarray:
        if self.model_tag not in (NLS, NWE):
            raise AttributeError("psi is only defined for NLS/NWE states")
        return self.components[0]

    @property
    def phi(self) -> np.ndarray:
        if self.model_tag != NWE:
            raise AttributeError("phi is only defined for NWE states")
        return self.components[1]

    @property
    def u(self) -> np.ndarray:
        if self.model_tag != NBE:
            raise AttributeError("u is only defined for NBE states")
        return self.components[0]

    @property
    def v(self) -> np.ndarray:
        if self.model_tag != NBE:
            raise AttributeError("v is only defined for NBE states")
        return self.components[1]

    @staticmethod
    def nls(grid: Grid, psi) -> "FieldState":
        return FieldState(NLS, grid, (psi,))

    @staticmethod
    def nwe(grid: Grid, psi, phi) -> "FieldState":
        return FieldState(NWE, grid, (psi, phi))

    @staticmethod
    def nbe(grid: Grid, u, v) -> "FieldState":
        return FieldState(NBE, grid, (u, v))

    @staticmethod
    def zero(model_tag: str, grid: Grid) -> "FieldState":
        dtype = np.complex128 if model_tag in COMPLEX_MODELS else np.float64
        ncomp = len(COMPONENT_NAMES[model_tag])
        return FieldState(model_tag, grid, tuple(np.zeros(grid.n, dtype) for _ in range(ncomp)))

    def replace_components(self, components) -> "FieldState":
        return FieldState(self.model_tag, self.grid, components)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Discrete box integral: cell volume times the sample sum.

    On a periodic grid this is the trapezoid rule, which is spectrally
    exact for band-limited integrands.
    """
    arr = np.asarray(values)
    if arr.shape != tuple(grid.n):
        raise GridMismatch(f"field shape {arr.shape} != grid {grid.n}")
    return grid.cell_volume * float(np.sum(arr.real))


def spectral_derivative(grid: Grid, values: np.ndarray, axis: int | None = None,
                        order: int = 1) -> np.ndarray:
    """Fourier-multiplier derivative (ik)^order along one axis.

    order=2 with axis=None is the Laplacian (sum over axes).  Odd orders
    zero the Nyquist mode so real input gives real output; even orders on
    real input return real arrays.
    """
    if order not in (1, 2, 4):
        raise ValueError(f"derivative order must be 1, 2 or 4, got {order}")
    arr = np.asarray(values)
    if arr.shape != tuple(grid.n):
        raise GridMismatch(f"field shape {arr.shape} != grid {grid.n}")
    was_real = not np.iscomplexobj(arr)
    spec = np.fft.fftn(arr)
    if axis is None:
        if order == 2:
            spec = -k_squared(grid) * spec
        elif grid.dim == 1:
            axis = 0
        else:
            raise ValueError("axis is required for orders 1 and 4 in dimension > 1")
    if axis is not None:
        k = _axis_k_mesh(grid, axis)
        if order == 1:
            mult = 1j * k.copy()
            ny = grid.n[axis] // 2
            idx = [slice(None)] * grid.dim
            idx[axis] = ny
            mult[tuple(idx)] = 0.0  # Nyquist has no signed wavenumber
            spec = mult * spec
        elif order == 2:
            spec = -(k**2) * spec
        else:
            spec = (k**4) * spec
    out = np.fft.ifftn(spec)
    return out.real if was_real else out


@lru_cache(maxsize=64)
def _unit_ball_mask(grid: Grid) -> np.ndarray:
    """Indicator of the radius-1 ball around index 0, periodic metric."""
    dist_sq = np.zeros(grid.n)
    for axis in range(grid.dim):
        idx = np.arange(grid.n[axis])
        d = np.minimum(idx, grid.n[axis] - idx) * grid.spacing[axis]
        shape = [1] * grid.dim
        shape[axis] = grid.n[axis]
        dist_sq = dist_sq + d.reshape(shape) ** 2
    mask = (dist_sq <= 1.0).astype(np.float64)
    mask.setflags(write=False)
    return mask


def sharp_seminorm(state: FieldState) -> float:
    """Localization seminorm: best local L2 mass (NLS/NWE) or sup |u| (NBE).

    For NLS/NWE this is the max over grid points z of the squared-amplitude
    integral over the radius-1 periodic ball around z, square-rooted; small
    values certify that no unit ball retains mass.
    """
    if state.model_tag == NBE:
        return float(np.abs(state.u).max())
    grid = state.grid
    if min(grid.box_length) <= 2.0:
        raise ValueError("unit ball wraps around: every box length must exceed 2")
    density = np.abs(state.psi) ** 2
    mask = _unit_ball_mask(grid)
    conv = np.fft.ifftn(np.fft.fftn(density) * np.fft.fftn(mask)).real
    best = max(float(conv.max()) * grid.cell_volume, 0.0)
    return float(np.sqrt(best))


def translate(state: FieldState, shift: LatticeShift) -> FieldState:
    """Shift every component by whole grid cells (exact, periodic)."""
    z = shift.z
    if len(z) != state.grid.dim:
        raise GridMismatch(f"shift has {len(z)} entries for a {state.grid.dim}-d grid")
    axes = tuple(range(state.grid.dim))
    return state.replace_components(tuple(np.roll(c, z, axis=axes) for c in state.components))


def phase_rotate(state: FieldState, theta: float) -> FieldState:
    """Global phase rotation e^{i theta} (complex models only)."""
    if state.model_tag not in COMPLEX_MODELS:
        raise ValueError("phase rotation applies to complex models only")
    factor = np.exp(1j * theta)
    return state.replace_components(tuple(factor * c for c in state.components))


def _component_weights(state: FieldState) -> list[np.ndarray]:
    """Spectral weights so sum_c <w_c F_a, F_b> realizes the state-space product."""
    grid = state.grid
    if state.model_tag == NLS:
        return [1.0 + k_squared(grid)]
    if state.model_tag == NWE:
        return [1.0 + k_squared(grid), np.ones(grid.n)]
    kx = _axis_k_mesh(grid, 0)
    return [1.0 + np.broadcast_to(kx**4, grid.n), np.ones(grid.n)]


def x_norm(state: FieldState) -> float:
    """Phase-space norm: L2 of the components plus their defining derivatives.

    NLS: (|grad psi|^2 + |psi|^2); NWE adds |phi|^2; NBE uses
    (v^2 + u_xx^2 + u^2).  Computed spectrally via Parseval.
    """
    grid = state.grid
    weights = _component_weights(state)
    total = 0.0
    scale = grid.cell_volume / np.prod(grid.n)
    for comp, w in zip(state.components, weights):
        spec = np.fft.fftn(comp)
        total += scale * float(np.sum(w * np.abs(spec) ** 2))
    return float(np.sqrt(max(total, 0.0)))


def orbit_distance(a: FieldState, b: FieldState) -> float:
    """Distance between group orbits: min over lattice shifts (and, for
    complex models, global phase) of the phase-space norm of the difference.

    The minimum over all shifts is computed exactly in one pass via FFT
    cross-correlation of the weighted components.
    """
    if a.model_tag != b.model_tag:
        raise GridMismatch("states have different model tags")
    if a.grid != b.grid:
        raise GridMismatch("states live on different grids")
    grid = a.grid
    weights = _component_weights(a)
    corr = np.zeros(grid.n, dtype=np.complex128)
    for ca, cb, w in zip(a.components, b.components, weights):
        corr += w * np.fft.fftn(ca) * np.conj(np.fft.fftn(cb))
    # corr(z) = <a, g_z b> for every lattice shift z at once
    corr_z = np.fft.ifftn(corr) * grid.cell_volume
    if a.model_tag in COMPLEX_MODELS:
        gain = np.abs(corr_z)  # optimal phase: theta = arg corr
    else:
        gain = corr_z.real
    # the norm identity ||a||^2 + ||b||^2 - 2 max gain locates the optimum,
    # but cancels catastrophically near zero; evaluate the distance directly
    # on the aligned difference, which is exact there
    flat = int(np.argmax(gain))
    z_best = np.unravel_index(flat, grid.n)
    aligned = translate(b, LatticeShift(tuple(int(v) for v in z_best)))
    candidates = [aligned]
    if a.model_tag in COMPLEX_MODELS and abs(corr_z[z_best]) > 0:
        phase = corr_z[z_best] / abs(corr_z[z_best])
        candidates.append(aligned.replace_components(
            tuple(phase * c for c in aligned.components)))
    best = np.inf
    for cand in candidates:
        diff = a.replace_components(tuple(
            x - y for x, y in zip(a.components, cand.components)))
        best = min(best, x_norm(diff))
    return best


def random_band_limited(grid: Grid, rng: SplitMix64, band_limit: int | None = None,
                        complex_valued: bool = False, rms: float = 1.0) -> np.ndarray:
    """Smooth random field: uniform white noise low-passed to |mode| <= band_limit,
    normalized to the requested root-mean-square sample value.

    Uniform (not Gaussian) raw draws keep the pre-FFT stream free of
    transcendental libm calls.
    """
    if band_limit is None:
        band_limit = min(grid.n) // 4
    total = int(np.prod(grid.n))
    raw = rng.symmetric(total).reshape(grid.n)
    if complex_valued:
        raw = raw + 1j * rng.symmetric(total).reshape(grid.n)
    spec = np.fft.fftn(raw)
    keep = np.ones(grid.n, dtype=bool)
    for axis in range(grid.dim):
        idx = np.arange(grid.n[axis])
        mode = np.minimum(idx, grid.n[axis] - idx)
        shape = [1] * grid.dim
        shape[axis] = grid.n[axis]
        keep &= (mode.reshape(shape) <= band_limit)
    spec[~keep] = 0.0
    out = np.fft.ifftn(spec)
    out = out if complex_valued else out.real
    current = float(np.sqrt(np.mean(np.abs(out) ** 2)))
    if current > 0.0:
        out = out * (rms / current)
    return out


def random_state(model_tag: str, grid: Grid, rng: SplitMix64,
                 amplitude: float = 1.0, band_limit: int | None = None) -> FieldState:
    """Random smooth state with each component at the given rms amplitude."""
    complex_valued = model_tag in COMPLEX_MODELS
    ncomp = len(COMPONENT_NAMES[model_tag])
    comps = [random_band_limited(grid, rng, band_limit, complex_valued, rms=amplitude)
             for _ in range(ncomp)]
    return FieldState(model_tag, grid, comps)
