"""Physical parameters, derived quantities, and unit conversions.

Rates are angular field/polarization decay rates in inverse time. The
library accepts absolute rates; the CLI defaults to the natural scale
``gamma = 1``. Lengths of the physical cavity are expressed in time units
(``c = 1``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError

REGIME_RTOL = 1e-6


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _finite(x: float) -> bool:
    return math.isfinite(x)


@dataclass(frozen=True)
class AtomCavityParams:
    """Rate description of a single atom in a one-sided cavity.

    Parameters
    ----------
    g : float
        Atom-cavity coupling rate.
    gamma : float
        Atomic polarization decay rate.
    kappa_in : float
        Internal (loss) cavity field decay rate; zero means a lossless mirror set.
    kappa_ex : float
        External (output-coupler) cavity field decay rate.
    """

    g: float
    gamma: float
    kappa_in: float
    kappa_ex: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            _require(_finite(v), f"{f.name} must be finite, got {v!r}")
        _require(self.g > 0, f"g must be positive, got {self.g}")
        _require(self.gamma > 0, f"gamma must be positive, got {self.gamma}")
        _require(self.kappa_ex > 0, f"kappa_ex must be positive, got {self.kappa_ex}")
        _require(self.kappa_in >= 0, f"kappa_in must be non-negative, got {self.kappa_in}")

    @property
    def kappa(self) -> float:
        return self.kappa_in + self.kappa_ex

    @property
    def cooperativity(self) -> float:
        """C = g^2 / (2 kappa gamma)."""
        return self.g**2 / (2.0 * self.kappa * self.gamma)

    @property
    def internal_cooperativity(self) -> float:
        """C_in = g^2 / (2 kappa_in gamma); ``inf`` for a lossless cavity."""
        if self.kappa_in == 0:
            return math.inf
        return self.g**2 / (2.0 * self.kappa_in * self.gamma)

    @property
    def eta_esc(self) -> float:
        return self.kappa_ex / self.kappa

    def scaled(self, factor: float) -> AtomCavityParams:
        """All four rates multiplied by ``factor``."""
        _require(factor > 0, "scale factor must be positive")
        return AtomCavityParams(
            self.g * factor, self.gamma * factor, self.kappa_in * factor, self.kappa_ex * factor
        )

    def with_kappa_ex(self, kappa_ex: float) -> AtomCavityParams:
        return replace(self, kappa_ex=kappa_ex)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian output pulse of width ``tau`` centred at t = 0.

    The simulation window is ``[-N tau, +N tau]`` with
    ``N = window_halfwidth_in_tau``.
    """

    tau: float
    window_halfwidth_in_tau: float = 6.0

    def __post_init__(self):
        _require(_finite(self.tau) and self.tau > 0, f"tau must be positive, got {self.tau}")
        _require(
            self.window_halfwidth_in_tau >= 4,
            f"window half-width must be >= 4 tau, got {self.window_halfwidth_in_tau}",
        )

    @property
    def t_start(self) -> float:
        return -self.window_halfwidth_in_tau * self.tau

    @property
    def t_end(self) -> float:
        return self.window_halfwidth_in_tau * self.tau

    def grid(self, n: int = 4096) -> np.ndarray:
        """Uniform time grid spanning the truncation window."""
        if n < 8:
            raise DomainError(f"grid needs at least 8 samples, got {n}")
        return np.linspace(self.t_start, self.t_end, n)


@dataclass(frozen=True)
class Detunings:
    """Two-photon (``delta_u``) and one-photon (``delta_e``) detunings."""

    delta_u: float = 0.0
    delta_e: float = 0.0

    def __post_init__(self):
        _require(_finite(self.delta_u) and _finite(self.delta_e), "detunings must be finite")

    @property
    def resonant(self) -> bool:
        return self.delta_u == 0 and self.delta_e == 0


@dataclass(frozen=True)
class PhysicalCavity:
    """Geometric/optical description of a Fabry-Perot type cavity.

    ``a_eff_tilde`` is the mode area in units of the resonant scattering
    cross section, ``l_cav`` the length in natural time units, ``alpha_loss``
    the round-trip internal loss and ``t_ex`` the output-coupler
    transmittance.
    """

    a_eff_tilde: float
    l_cav: float
    alpha_loss: float
    t_ex: float

    def __post_init__(self):
        _require(_finite(self.a_eff_tilde) and self.a_eff_tilde > 0, "a_eff_tilde must be positive")
        _require(_finite(self.l_cav) and self.l_cav > 0, "l_cav must be positive")
        _require(0 < self.alpha_loss < 1, f"alpha_loss must lie in (0, 1), got {self.alpha_loss}")
        _require(0 < self.t_ex <= 1, f"t_ex must lie in (0, 1], got {self.t_ex}")

    @property
    def internal_cooperativity(self) -> float:
        return 1.0 / (self.a_eff_tilde * self.alpha_loss)

    @property
    def kex_over_kin(self) -> float:
        return self.t_ex / self.alpha_loss


def physical_to_rates(cav: PhysicalCavity, gamma: float = 1.0) -> AtomCavityParams:
    """Map cavity geometry and mirror parameters onto (g, gamma, kappa_in, kappa_ex)."""
    _require(_finite(gamma) and gamma > 0, f"gamma must be positive, got {gamma}")
    g = math.sqrt(gamma / (2.0 * cav.a_eff_tilde * cav.l_cav))
    kappa_in = cav.alpha_loss / (4.0 * cav.l_cav)
    kappa_ex = cav.t_ex / (4.0 * cav.l_cav)
    return AtomCavityParams(g, gamma, kappa_in, kappa_ex)


def resolve_from_ratios(
    g_over_kappa: float, C: float, eta_esc: float, gamma: float = 1.0
) -> AtomCavityParams:
    """Absolute rates from (g/kappa, C, eta_esc) at a given gamma.

    From C = g^2/(2 kappa gamma) and g/kappa = r it follows that
    g = 2 C gamma / r and kappa = g / r.
    """
    for name, v in (("g_over_kappa", g_over_kappa), ("C", C), ("eta_esc", eta_esc), ("gamma", gamma)):
        _require(_finite(v) and v > 0, f"{name} must be positive, got {v}")
    _require(eta_esc <= 1, f"eta_esc must not exceed 1, got {eta_esc}")
    g = 2.0 * C * gamma / g_over_kappa
    kappa = g / g_over_kappa
    kappa_ex = eta_esc * kappa
    kappa_in = kappa - kappa_ex if eta_esc < 1 else 0.0
    return AtomCavityParams(g, gamma, kappa_in, kappa_ex)


class Regime(str, enum.Enum):
    PURCELL = "Purcell"
    STRONG = "Strong"
    WEAK_HIGH_C = "WeakHighC"
    INTERMEDIATE = "Intermediate"


def _gt(a: float, b: float, rtol: float) -> bool:
    # strict inequality outside a relative tie band
    return a > b * (1.0 + rtol)


def classify_regime(p: AtomCavityParams, rtol: float = REGIME_RTOL) -> Regime:
    """Coupling regime from the ordering of g, gamma, kappa and g^2/kappa.

    Near-ties (within ``rtol``) fall through to ``Intermediate``.
    """
    g, gamma, kappa = p.g, p.gamma, p.kappa
    if _gt(g, kappa, rtol) and _gt(g, gamma, rtol):
        return Regime.STRONG
    if _gt(gamma, g, rtol) and _gt(g, kappa, rtol):
        return Regime.WEAK_HIGH_C
    purcell_rate = g * g / kappa
    if _gt(kappa, purcell_rate, rtol) and _gt(purcell_rate, gamma, rtol):
        return Regime.PURCELL
    return Regime.INTERMEDIATE


def regime_labels(g, gamma, kappa, rtol: float = REGIME_RTOL) -> np.ndarray:
    """Array version of :func:`classify_regime`; returns regime names as strings."""
    g, gamma, kappa = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (g, gamma, kappa)))
    s = 1.0 + rtol
    purcell_rate = g * g / kappa
    out = np.full(g.shape, Regime.INTERMEDIATE.value, dtype=object)
    purcell = (kappa > purcell_rate * s) & (purcell_rate > gamma * s)
    weak = (gamma > g * s) & (g > kappa * s)
    strong = (g > kappa * s) & (g > gamma * s)
    # later assignments win, matching the precedence of the scalar version
    out[purcell] = Regime.PURCELL.value
    out[weak] = Regime.WEAK_HIGH_C.value
    out[strong] = Regime.STRONG.value
    return out


# -- flat key/value configuration files ---------------------------------------

CONFIG_KEYS = (
    "g",
    "gamma",
    "kappa_in",
    "kappa_ex",
    "tau",
    "delta_u",
    "delta_e",
    "a_eff_tilde",
    "l_cav",
    "alpha_loss",
    "t_ex",
)


def parse_config(text: str, source: str = "<config>") -> dict[str, float]:
    """Parse ``key = value`` lines into floats.

    Blank lines and ``#`` comments are ignored; ``:`` is accepted as a
    separator too. Unknown keys, duplicates and non-numeric values raise
    :class:`ConfigError` naming the line.
    """
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, _, value = line.partition(sep)
                break
        else:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        value = value.strip().strip('"').strip("'")
        if key not in CONFIG_KEYS:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r} (allowed: {', '.join(CONFIG_KEYS)})"
            )
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: value for {key!r} is not a number: {value!r}") from None
    return out


def load_config(path: str | Path) -> dict[str, float]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
