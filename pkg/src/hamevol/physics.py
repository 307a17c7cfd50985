"""Flavor-basis neutrino Hamiltonian in matter.

``H(t) = U diag(m_a^2 / 2E) U^dagger + rho(t) |e><e|`` where ``U`` is the
(CP-conserving) mixing matrix with rows ordered by flavor (e, mu, tau) and
columns by mass eigenstate, and ``rho = +/- sqrt(2) G_F N_e`` is the charged
current potential. The common ``E`` term of the relativistic expansion is a
global phase and is dropped.

Indices are 0-based: flavor 0 is the electron flavor.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from . import _kernel
from .constants import POTENTIAL_PER_DENSITY, REARTH, RSUN


@dataclass(frozen=True)
class MixingParameters:
    """Mixing angles (radians) for ``n_flavors`` in {2, 3}.

    For two flavors only ``theta12`` is meaningful and the other two angles
    must be zero.
    """

    theta12: float
    theta23: float = 0.0
    theta13: float = 0.0
    n_flavors: int = 3

    def __post_init__(self):
        if self.n_flavors not in (2, 3):
            raise ValueError(f"n_flavors must be 2 or 3, got {self.n_flavors}")
        for name in ("theta12", "theta23", "theta13"):
            value = getattr(self, name)
            if not 0.0 <= value <= math.pi / 2:
                raise ValueError(f"{name}={value} outside [0, pi/2]")
        if self.n_flavors == 2 and (self.theta23 != 0.0 or self.theta13 != 0.0):
            raise ValueError("two-flavor mixing uses theta12 only; theta23 and theta13 must be 0")


@dataclass(frozen=True)
class MassSpectrum:
    """Neutrino masses (eV) and the neutrino energy (eV)."""

    masses: tuple
    energy: float

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if not masses:
            raise ValueError("at least one mass is required")
        if any(not (m >= 0 and math.isfinite(m)) for m in masses):
            raise ValueError(f"masses must be finite and >= 0, got {masses}")
        if not (self.energy > 0 and math.isfinite(self.energy)):
            raise ValueError(f"energy must be positive, got {self.energy}")
        if max(masses) > 0 and self.energy < 100 * max(masses):
            warnings.warn(
                f"energy {self.energy} eV is not >> max mass {max(masses)} eV; "
                "the relativistic expansion may be inaccurate",
                stacklevel=3,
            )

    @property
    def n(self):
        return len(self.masses)

    @property
    def dm2(self):
        """``dm2[a, b] = m_a^2 - m_b^2`` in eV^2 (read-only)."""
        m2 = np.square(self.masses)
        out = m2[:, None] - m2[None, :]
        out.setflags(write=False)
        return out


class ProfileKind(str, Enum):
    SOLAR = "solar-exponential"
    EARTH = "earth-two-layer"
    TABULATED = "user-tabulated"


_KIND_CODES = {
    ProfileKind.SOLAR: _kernel.SOLAR,
    ProfileKind.EARTH: _kernel.EARTH,
    ProfileKind.TABULATED: _kernel.TABULATED,
}


@dataclass(frozen=True)
class DensityProfile:
    """Electron density ``N_e(r)`` in units of N_A / cm^3 for ``0 <= r <= radius``.

    * solar-exponential: ``n0 * exp(-lambda_scaled * r / radius)``
    * earth-two-layer: ``core_density`` for ``r <= core_fraction * radius``,
      ``mantle_density`` outside
    * user-tabulated: linear interpolation of ``table`` rows
      ``(r / radius, density)``
    """

    kind: ProfileKind = ProfileKind.SOLAR
    n0: float = 245.0
    lambda_scaled: float = 10.6
    radius: float = RSUN
    table: tuple = None
    core_density: float = 11.0
    mantle_density: float = 4.5
    core_fraction: float = 0.55

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.kind is ProfileKind.SOLAR:
            if not (self.n0 >= 0 and math.isfinite(self.n0)):
                raise ValueError(f"n0 must be finite and >= 0, got {self.n0}")
            if not math.isfinite(self.lambda_scaled):
                raise ValueError("lambda_scaled must be finite")
        elif self.kind is ProfileKind.EARTH:
            if self.core_density < 0 or self.mantle_density < 0:
                raise ValueError("layer densities must be >= 0")
            if not 0.0 <= self.core_fraction <= 1.0:
                raise ValueError(f"core_fraction must lie in [0, 1], got {self.core_fraction}")
        else:
            if self.table is None or len(self.table) < 1:
                raise ValueError("a tabulated profile needs at least one (r, density) row")
            table = tuple((float(x), float(d)) for x, d in self.table)
            xs = np.array([x for x, _ in table])
            ds = np.array([d for _, d in table])
            if np.any(np.diff(xs) <= 0):
                raise ValueError("tabulated radius fractions must be strictly increasing")
            if xs[0] < 0 or xs[-1] > 1:
                raise ValueError("tabulated radius fractions must lie in [0, 1]")
            if not np.all(np.isfinite(ds)) or np.any(ds < 0):
                raise ValueError("tabulated densities must be finite and >= 0")
            object.__setattr__(self, "table", table)

    @classmethod
    def solar(cls, n0=245.0, lambda_scaled=10.6, radius=RSUN):
        return cls(ProfileKind.SOLAR, n0=n0, lambda_scaled=lambda_scaled, radius=radius)

    @classmethod
    def earth(cls, core_density=11.0, mantle_density=4.5, core_fraction=0.55, radius=REARTH):
        return cls(
            ProfileKind.EARTH,
            radius=radius,
            core_density=core_density,
            mantle_density=mantle_density,
            core_fraction=core_fraction,
        )

    @classmethod
    def tabulated(cls, rows, radius):
        return cls(ProfileKind.TABULATED, radius=radius, table=tuple(rows))

    @classmethod
    def from_file(cls, path, radius):
        """Read ``radius-fraction density`` rows; ``#`` starts a comment line."""
        rows = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
                rows.append((float(parts[0]), float(parts[1])))
        return cls.tabulated(rows, radius)

    @cached_property
    def kernel_args(self):
        pars = np.array(
            [
                self.n0,
                self.lambda_scaled,
                self.radius,
                self.core_density,
                self.mantle_density,
                self.core_fraction,
            ],
            dtype=float,
        )
        if self.table is None:
            tab_x = np.zeros(1)
            tab_y = np.zeros(1)
        else:
            tab_x = np.array([x for x, _ in self.table])
            tab_y = np.array([d for _, d in self.table])
        return _KIND_CODES[self.kind], pars, tab_x, tab_y


def build_mixing_matrix(mixing):
    """Mixing matrix with rows (e, mu, tau) and columns (1, 2, 3), zero CP phase."""
    s1, c1 = math.sin(mixing.theta12), math.cos(mixing.theta12)
    if mixing.n_flavors == 2:
        return np.array([[c1, s1], [-s1, c1]], dtype=np.complex128)
    s2, c2 = math.sin(mixing.theta23), math.cos(mixing.theta23)
    s3, c3 = math.sin(mixing.theta13), math.cos(mixing.theta13)
    return np.array(
        [
            [c1 * c3, s1 * c3, s3],
            [-s1 * c2 - c1 * s3 * s2, c1 * c2 - s1 * s3 * s2, c3 * s2],
            [s1 * s2 - c1 * s3 * c2, -c1 * s2 - s1 * s3 * c2, c3 * c2],
        ],
        dtype=np.complex128,
    )


def vacuum_hamiltonian_flavor(spectrum, mixing_matrix):
    """``U diag(m^2 / 2E) U^dagger`` in eV."""
    if not spectrum.energy > 0:
        raise ValueError(f"energy must be positive, got {spectrum.energy}")
    u = np.asarray(mixing_matrix, dtype=np.complex128)
    if u.shape != (spectrum.n, spectrum.n):
        raise ValueError(f"mixing matrix shape {u.shape} does not match {spectrum.n} masses")
    diag = np.square(spectrum.masses) / (2.0 * spectrum.energy)
    h = (u * diag) @ u.conj().T
    # symmetrise away rounding so the matrix is exactly Hermitian
    return 0.5 * (h + h.conj().T)


def electron_density(profile, r):
    """Electron density at radial distance ``r`` (1/eV), in N_A / cm^3."""
    if not 0.0 <= r <= profile.radius:
        raise ValueError(f"r={r} outside [0, {profile.radius}]")
    return _kernel.density_at(*profile.kernel_args, float(r))


def matter_potential(density, antineutrino=False):
    """``+/- sqrt(2) G_F N_e`` in eV for a density in N_A / cm^3."""
    if density < 0:
        raise ValueError(f"density must be >= 0, got {density}")
    rho = POTENTIAL_PER_DENSITY * density
    return -rho if antineutrino else rho


@dataclass(frozen=True)
class HamiltonianModel:
    """Everything needed to evaluate ``H(t)``.

    ``t`` is the radial distance from the centre of ``profile``. With
    ``crossing=True`` the model describes a straight path through the centre
    instead: ``t`` runs over ``[0, 2 * radius]`` and the density is taken at
    ``|t - radius|``.

    The model is callable as ``model(t, i, j)`` for use with :mod:`hamevol.rk`.
    """

    mixing: MixingParameters
    spectrum: MassSpectrum
    profile: DensityProfile = field(default_factory=DensityProfile)
    antineutrino: bool = False
    crossing: bool = False
    mixing_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    vacuum_flavor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.spectrum.n != self.mixing.n_flavors:
            raise ValueError(
                f"{self.spectrum.n} masses given for {self.mixing.n_flavors} flavors"
            )
        u = build_mixing_matrix(self.mixing)
        h0 = vacuum_hamiltonian_flavor(self.spectrum, u)
        u.setflags(write=False)
        h0.setflags(write=False)
        object.__setattr__(self, "mixing_matrix", u)
        object.__setattr__(self, "vacuum_flavor", h0)

    @property
    def n(self):
        return self.mixing.n_flavors

    @property
    def length(self):
        """Extent of the coordinate ``t``."""
        return 2.0 * self.profile.radius if self.crossing else self.profile.radius

    @cached_property
    def _rho_scale(self):
        return -POTENTIAL_PER_DENSITY if self.antineutrino else POTENTIAL_PER_DENSITY

    def radial(self, t):
        return abs(t - self.profile.radius) if self.crossing else t

    def potential(self, t):
        """Matter potential ``rho(t)`` in eV."""
        r = self.radial(t)
        return matter_potential(electron_density(self.profile, r), self.antineutrino)

    def matrix(self, t):
        h = np.array(self.vacuum_flavor)
        h[0, 0] += self._rho_scale * _kernel.density_at(*self.profile.kernel_args, float(self.radial(t)))
        return h

    def matrices(self, ts):
        """Stack of ``H(t)`` for an array of positions, shape ``(len(ts), n, n)``."""
        ts = np.asarray(ts, dtype=float)
        args = self.profile.kernel_args
        dens = np.array([_kernel.density_at(*args, float(self.radial(t))) for t in ts])
        out = np.broadcast_to(self.vacuum_flavor, (ts.size, self.n, self.n)).copy()
        out[:, 0, 0] += self._rho_scale * dens
        return out

    def kernel_args(self):
        kind, pars, tab_x, tab_y = self.profile.kernel_args
        h0 = np.ascontiguousarray(self.vacuum_flavor)
        return (h0, float(self._rho_scale), kind, pars, tab_x, tab_y, bool(self.crossing))

    def __call__(self, t, i, j):
        return total_hamiltonian(self, t, i, j)


def total_hamiltonian(model, t, i, j):
    """Single element ``H_ij(t)`` in eV (0-based indices)."""
    n = model.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"index ({i}, {j}) out of range for {n} flavors")
    value = complex(model.vacuum_flavor[i, j])
    if i == 0 and j == 0:
        value += model.potential(t)
    return value


def resonance_position(model, conventional=False):
    """Smallest radius where the potential meets the two-flavor resonance.

    The target is ``dm2 * cos(2 theta) / E`` with ``dm2 = m2^2 - m1^2`` and
    ``theta = theta12``; ``conventional=True`` uses ``dm2 cos 2theta / 2E``
    instead. Returns ``None`` when the potential never reaches the target on
    ``[0, radius]`` or when ``cos 2theta <= 0``.
    """
    spectrum = model.spectrum
    if spectrum.n < 2:
        return None
    dm2 = spectrum.masses[1] ** 2 - spectrum.masses[0] ** 2
    cos2 = math.cos(2.0 * model.mixing.theta12)
    # cos(pi/2) is 6e-17 in floating point; maximal mixing has no resonance
    if cos2 <= 1e-12:
        return None
    target = dm2 * cos2 / spectrum.energy
    if conventional:
        target /= 2.0
    if target <= 0:
        return None
    profile = model.profile
    rho_scale = model._rho_scale

    def excess(r):
        return rho_scale * _kernel.density_at(*profile.kernel_args, float(r)) - target

    if profile.kind is ProfileKind.SOLAR:
        rho0 = rho_scale * profile.n0
        if rho0 < target or profile.lambda_scaled <= 0:
            return 0.0 if rho0 == target else None
        r = profile.radius / profile.lambda_scaled * math.log(rho0 / target)
        return r if r <= profile.radius else None

    grid = np.linspace(0.0, profile.radius, 4097)
    values = np.array([excess(r) for r in grid])
    if values[0] == 0.0:
        return 0.0
    crossings = np.nonzero(np.sign(values[1:]) != np.sign(values[:-1]))[0]
    if crossings.size == 0:
        return None
    k = crossings[0]
    if values[k + 1] == 0.0:
        return float(grid[k + 1])
    return brentq(excess, grid[k], grid[k + 1], xtol=1e-12 * profile.radius)
