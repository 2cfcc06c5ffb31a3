"""Discrete calculus on the unit periodic torus.

All fields live on an N x N uniform grid of the unit square with periodic
wrap-around, sampled at nodes (i/N, j/N) and interpreted as 1-periodic
functions.  The torus is normalized to unit measure, so spatial integrals
are plain grid means.  Derivatives, elliptic solves and Sobolev norms are
computed in the discrete Fourier basis and are exact on band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Field2D",
    "SpectralField2D",
    "constant",
    "from_function",
    "transform",
    "inverse",
    "derivative",
    "laplacian",
    "solve_helmholtz",
    "solve_poisson_meanzero",
    "sobolev_norm",
    "lp_norm",
    "dealias",
    "mean",
    "grid",
    "write_snapshot",
    "read_snapshot",
]


def _check_grid_size(n: int) -> None:
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 2, got {n}")


@dataclass(frozen=True)
class Field2D:
    """Real scalar field sampled on the N x N grid of the unit torus.

    ``data[i, j]`` is the sample at (x, y) = (i/N, j/N).  Instances are
    immutable values; every operation returns a new field.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        _check_grid_size(arr.shape[0])
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"field data must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite samples")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def _coerce(self, other):
        if isinstance(other, Field2D):
            if other.n != self.n:
                raise ValueError(f"grid size mismatch: {self.n} vs {other.n}")
            return other.data
        return other

    def __add__(self, other):
        return Field2D(self.data + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field2D(self.data - self._coerce(other))

    def __rsub__(self, other):
        return Field2D(self._coerce(other) - self.data)

    def __mul__(self, other):
        return Field2D(self.data * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field2D(self.data / self._coerce(other))

    def __neg__(self):
        return Field2D(-self.data)

    def min(self) -> float:
        return float(self.data.min())

    def max(self) -> float:
        return float(self.data.max())


@dataclass(frozen=True)
class SpectralField2D:
    """Discrete Fourier coefficients of a real field.

    Coefficients follow the ``np.fft`` layout with the *forward* 1/N^2
    normalization, so ``coeffs[0, 0]`` is the field mean and Parseval reads
    ``sum |coeffs|^2 == lp_norm(f, 2)**2``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        _check_grid_size(arr.shape[0])
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]


def constant(n: int, value: float) -> Field2D:
    """Field identically equal to ``value``."""
    return Field2D(np.full((n, n), float(value)))


def grid(n: int):
    """Node coordinates (x, y) as broadcastable arrays, x along axis 0."""
    x = np.arange(n) / n
    return x[:, None], x[None, :]


def from_function(n: int, f) -> Field2D:
    """Sample ``f(x, y)`` at the grid nodes."""
    x, y = grid(n)
    return Field2D(np.broadcast_to(np.asarray(f(x, y), dtype=np.float64), (n, n)).copy())


def transform(f: Field2D) -> SpectralField2D:
    return SpectralField2D(np.fft.fft2(f.data, norm="forward"))


def inverse(sf: SpectralField2D) -> Field2D:
    return Field2D(np.fft.ifft2(sf.coeffs, norm="forward").real)


def _wavenumbers(n: int):
    k = np.fft.fftfreq(n) * n  # integer wavenumbers
    return k[:, None], k[None, :]


def mean(f: Field2D) -> float:
    """Grid mean; equals the integral under the unit-measure normalization."""
    return float(f.data.mean())


def derivative(f: Field2D, axis: str) -> Field2D:
    """Pseudospectral partial derivative along ``axis`` ("x" or "y").

    Multiplication by 2*pi*i*k in Fourier space; annihilates constants
    exactly because the k = 0 coefficient is multiplied by an exact zero.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    n = f.n
    kx, ky = _wavenumbers(n)
    k = kx if axis == "x" else ky
    fh = np.fft.fft2(f.data, norm="forward")
    return Field2D(np.fft.ifft2(2j * np.pi * k * fh, norm="forward").real)


def laplacian(f: Field2D) -> Field2D:
    """Fourier-multiplier Laplacian, -4*pi^2*|k|^2 per mode."""
    kx, ky = _wavenumbers(f.n)
    fh = np.fft.fft2(f.data, norm="forward")
    mult = -4.0 * np.pi**2 * (kx**2 + ky**2)
    return Field2D(np.fft.ifft2(mult * fh, norm="forward").real)


def solve_helmholtz(rho: Field2D, alpha: float, beta: float) -> Field2D:
    """Solve  Delta c + alpha*rho - beta*c = 0  exactly per Fourier mode.

    Requires beta > 0 (for beta = 0 the operator is singular on constants;
    use :func:`solve_poisson_meanzero` instead).
    """
    if beta <= 0:
        raise ValueError("solve_helmholtz requires beta > 0; use solve_poisson_meanzero for beta = 0")
    kx, ky = _wavenumbers(rho.n)
    rh = np.fft.fft2(rho.data, norm="forward")
    ch = alpha * rh / (beta + 4.0 * np.pi**2 * (kx**2 + ky**2))
    return Field2D(np.fft.ifft2(ch, norm="forward").real)


def solve_poisson_meanzero(rho: Field2D, alpha: float) -> Field2D:
    """Solve  Delta c = -alpha*(rho - mean(rho))  with the gauge mean(c) = 0.

    On the torus the source must be mean-free, so the mean of rho is
    projected out; only grad(c) enters the dynamics, so the gauge constant
    is immaterial.
    """
    kx, ky = _wavenumbers(rho.n)
    rh = np.fft.fft2(rho.data, norm="forward")
    k2 = 4.0 * np.pi**2 * (kx**2 + ky**2)
    k2[0, 0] = 1.0  # avoid 0/0; the mode is zeroed below
    ch = alpha * rh / k2
    ch[0, 0] = 0.0
    return Field2D(np.fft.ifft2(ch, norm="forward").real)


def sobolev_norm(f: Field2D, s: float) -> float:
    """Spectral H^s norm  (sum_k (1 + 4 pi^2 |k|^2)^s |f_k|^2)^(1/2).

    For s = 0 this coincides with the L^2 norm under unit measure.
    """
    if s < 0:
        raise ValueError("sobolev_norm requires s >= 0")
    kx, ky = _wavenumbers(f.n)
    fh = np.fft.fft2(f.data, norm="forward")
    weight = (1.0 + 4.0 * np.pi**2 * (kx**2 + ky**2)) ** s
    return float(np.sqrt(np.sum(weight * np.abs(fh) ** 2)))


def lp_norm(f: Field2D, p: float) -> float:
    """Discrete L^p norm by grid quadrature; max over nodes for p = inf."""
    if p == np.inf:
        return float(np.max(np.abs(f.data)))
    if p < 1:
        raise ValueError("lp_norm requires p >= 1 or inf")
    return float(np.mean(np.abs(f.data) ** p) ** (1.0 / p))


def dealias(sf: SpectralField2D) -> SpectralField2D:
    """Zero all modes with max(|k1|, |k2|) > N/3 (the 2/3 rule)."""
    n = sf.n
    kx, ky = _wavenumbers(n)
    cutoff = n // 3
    mask = (np.abs(kx) <= cutoff) & (np.abs(ky) <= cutoff)
    return SpectralField2D(sf.coeffs * mask)


def dealias_field(f: Field2D) -> Field2D:
    """Apply the 2/3 rule to a physical-space field (used after products)."""
    return inverse(dealias(transform(f)))


def write_snapshot(path, f: Field2D, t: float) -> None:
    """Write the shared binary snapshot: ASCII header then row-major float64.

    Format: one line ``F2D <N> <t>\\n`` followed by N*N little-endian
    doubles.
    """
    with open(path, "wb") as fh:
        fh.write(f"F2D {f.n} {t:.17g}\n".encode("ascii"))
        fh.write(f.data.astype("<f8").tobytes(order="C"))


def read_snapshot(path):
    """Read a snapshot; returns (Field2D, t)."""
    with open(path, "rb") as fh:
        header = bytearray()
        while True:
            b = fh.read(1)
            if not b:
                raise ValueError("truncated snapshot header")
            if b == b"\n":
                break
            header.extend(b)
        parts = header.decode("ascii").split()
        if len(parts) != 3 or parts[0] != "F2D":
            raise ValueError(f"bad snapshot header: {header!r}")
        n = int(parts[1])
        t = float(parts[2])
        raw = fh.read(8 * n * n)
        if len(raw) != 8 * n * n:
            raise ValueError("truncated snapshot payload")
        data = np.frombuffer(raw, dtype="<f8").reshape(n, n).copy()
    return Field2D(data), t
