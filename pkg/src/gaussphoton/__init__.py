"""Gaussian single-photon generation from an atom in a one-sided cavity.

Closed-form population dynamics and success-probability bounds, drive-field
synthesis, a brute-force amplitude integrator to check them against, and
output-coupler optimisation.
"""

from .analytic import (
    critical_times,
    monotonicity_violations,
    ps_finite_tau,
    ps_max,
    ps_max_details,
    ps_ub,
    rho_ee,
    rho_gg,
    rho_uu,
    rho_uu_dot,
    rho_uu_infinity,
    rho_uu_integral_form,
    tau_critical,
    waveform_w0,
)
from .drive import (
    DriveWaveform,
    amplitude_targets,
    drive_detuned,
    drive_resonant,
    phase_u_closed,
    read_waveform_csv,
    write_drive_csv,
)
from .errors import ConfigError, ConsistencyError, DivergenceError, DomainError, StiffnessError
from .optimize import (
    AxisSpec,
    Optimum,
    SweepGrid,
    design_conditions,
    kex_opt_adiabatic,
    kex_opt_numeric,
    sweep_custom,
    sweep_fig2,
    sweep_fig6,
    sweep_fig7,
)
from .params import (
    AtomCavityParams,
    Detunings,
    PhysicalCavity,
    PulseSpec,
    Regime,
    classify_regime,
    load_config,
    parse_config,
    physical_to_rates,
    resolve_from_ratios,
)
from .simulate import Trajectory, integrate, mode_overlap, output_waveform, success_probability

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
