"""2D spectral analysis of rendered images.

Spectra are computed on luminance with an unnormalized forward DFT and stored centered:
the zero frequency sits at (H // 2, W // 2). Frequency offsets (u, v) are measured from there,
u along columns and v along rows.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import SpectralConfig
from gsdefend.scene.types import ImageBuffer

BIN_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Spectrum:
    coeffs: np.ndarray

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.coeffs)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.coeffs)

    @property
    def energy(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    @property
    def center(self) -> tuple[int, int]:
        return center_of(self.shape)


@dataclass(frozen=True, eq=False)
class BandMask:
    mask: np.ndarray
    gamma_min: float
    gamma_max: float

    @property
    def count(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True, eq=False)
class AngularHistogram:
    energies: np.ndarray
    empty: bool

    @property
    def bins(self) -> int:
        return self.energies.shape[0]

    @property
    def total(self) -> float:
        return float(self.energies.sum())

    @property
    def probabilities(self) -> np.ndarray:
        if self.empty:
            return np.zeros_like(self.energies)
        return self.energies / self.energies.sum()


def center_of(shape: tuple[int, int]) -> tuple[int, int]:
    return shape[0] // 2, shape[1] // 2


def frequency_offsets(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) integer offsets from the centered zero frequency, each of the given shape."""
    cy, cx = center_of(shape)
    v, u = np.meshgrid(np.arange(shape[0]) - cy, np.arange(shape[1]) - cx, indexing="ij")
    return u, v


def paired_bins(shape: tuple[int, int]) -> np.ndarray:
    """
    Bins whose conjugate partner is also on the grid.

    An even axis has one unpaired Nyquist line at offset -N // 2 (index 0); it has no
    mirror, so it would break the antipodal and quarter-turn symmetry of the band.
    """
    paired = np.ones(shape, dtype=bool)
    if shape[0] % 2 == 0:
        paired[0, :] = False
    if shape[1] % 2 == 0:
        paired[:, 0] = False
    return paired


def antipodal(grid: np.ndarray) -> np.ndarray:
    """Reflect a centered grid through the zero frequency; unpaired bins map to zero."""
    r0, c0 = 1 - grid.shape[0] % 2, 1 - grid.shape[1] % 2
    out = np.zeros_like(grid)
    out[r0:, c0:] = grid[r0:, c0:][::-1, ::-1]
    return out


def dft2(img: ImageBuffer) -> Spectrum:
    return Spectrum(fft.fftshift(fft.fft2(img.luminance())))


def normalize_amplitude(spec: Spectrum) -> np.ndarray:
    """
    log(1 + |F|) divided by its maximum over paired non-DC bins.

    DC and unpaired Nyquist bins map to 0, an all-zero spectrum to zeros.
    """
    log_amp = np.log1p(spec.amplitude)
    log_amp[~paired_bins(spec.shape)] = 0.0
    log_amp[spec.center] = 0.0
    peak = log_amp.max()
    if peak <= 0:
        return np.zeros_like(log_amp)
    return log_amp / peak


def band_mask(norm_amp: np.ndarray, config: SpectralConfig) -> BandMask:
    """Paired bins whose normalized amplitude lies in [gamma_min, gamma_max], never DC; closed under u, v -> -u, -v."""
    selected = (norm_amp >= config.gamma_min) & (norm_amp <= config.gamma_max) & paired_bins(norm_amp.shape)
    if config.min_radius > 0:
        u, v = frequency_offsets(norm_amp.shape)
        selected &= np.hypot(u, v) >= config.min_radius
    selected &= antipodal(selected)
    selected[center_of(norm_amp.shape)] = False
    return BandMask(selected, config.gamma_min, config.gamma_max)


def angular_bins(shape: tuple[int, int], bins: int) -> np.ndarray:
    """Orientation sector of every bin: floor(B * (atan2(v, u) mod 2 pi) / 2 pi)."""
    u, v = frequency_offsets(shape)
    angle = np.mod(np.arctan2(v, u), 2 * np.pi)
    return np.floor(bins * angle / (2 * np.pi) + BIN_EPS).astype(np.int64) % bins


def bin_centers(bins: int) -> np.ndarray:
    return (np.arange(bins) + 0.5) * 2 * np.pi / bins


def angular_histogram(spec: Spectrum, mask: BandMask, bins: int, energy_floor: float = 1e-12) -> AngularHistogram:
    if bins < 2:
        raise InvalidParameterError(f"need at least 2 angular bins, got {bins}")
    sectors = angular_bins(spec.shape, bins)
    energies = np.bincount(sectors[mask.mask], weights=spec.energy[mask.mask], minlength=bins).astype(np.float64)
    return AngularHistogram(energies=energies, empty=bool(energies.sum() < energy_floor))


def radial_energy_profile(spec: Spectrum, n_rings: int) -> list[tuple[float, float]]:
    """
    Mean energy in equal-width annuli from DC (excluded) out to Nyquist.

    Returns:
        (ring center radius, mean energy) per ring; empty rings report 0
    """
    if n_rings < 2:
        raise InvalidParameterError(f"need at least 2 rings, got {n_rings}")
    u, v = frequency_offsets(spec.shape)
    radius = np.hypot(u, v)
    nyquist = min(spec.shape) / 2.0
    width = nyquist / n_rings
    inside = (radius > 0) & (radius <= nyquist)

    ring = np.minimum((radius[inside] / width).astype(np.int64), n_rings - 1)
    sums = np.bincount(ring, weights=spec.energy[inside], minlength=n_rings)
    counts = np.bincount(ring, minlength=n_rings)
    means = np.divide(sums, counts, out=np.zeros(n_rings), where=counts > 0)
    return [((k + 0.5) * width, float(means[k])) for k in range(n_rings)]


def spectrum_heatmap(spec: Spectrum) -> ImageBuffer:
    """Gray log-amplitude image, max-normalized, DC included."""
    log_amp = np.log1p(spec.amplitude)
    peak = log_amp.max()
    gray = log_amp / peak if peak > 0 else np.zeros_like(log_amp)
    return ImageBuffer(np.repeat(gray[..., None], 3, axis=2))
