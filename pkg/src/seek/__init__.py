"""Model-free source seeking for a unicycle with an open-loop rotating heading.

A single forward-speed input is modulated with periodic dithers chosen so the
averaged motion follows an iterated Lie bracket of the measurement field.
Matching the bracket order to the field's local polynomial degree turns
practical convergence into exponential convergence, and the package bundles
the simulation, certificate, and analysis tooling to study exactly that.
"""

from .analysis import (
    DecayFit,
    StabilityCertificate,
    VdotReport,
    averaging_gap,
    certify,
    convergence_time,
    fit_decay,
    lbs_gains,
    lyapunov_value,
    vdot_sample,
)
from .config import PRESETS, ScenarioConfig, parse_config, preset_names
from .dither import DitherSpec, MomentReport, dither_pair, moment_check, scaled_inputs
from .dynamics import (
    SimParams,
    commanded_velocity,
    esc1_rhs,
    esc3_rhs,
    first_order_velocity,
    from_rotating,
    lbs1_rhs,
    lbs3_rhs,
    to_rotating,
)
from .errors import (
    ConfigError,
    NonFiniteDerivativeError,
    StepSizeError,
    UnsupportedFieldError,
)
from .field import LightBowlField, MeasurementModel, QuadraticField, QuarticField
from .sim import IntegratorConfig, Trajectory, integrate, rk4_step, run_lbs, run_scenario

__version__ = "0.1.0"
