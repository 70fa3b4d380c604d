"""Black-box state preparation by inequality testing.

Statevector simulation, circuit accounting and resource estimates for
preparing coefficient vectors through comparator-based amplitude
transduction, including the square-root, polar and Cartesian variants.
"""

from .circuits import GateCounter, comparator
from .oracles import AmplitudeSpec, quantize
from .resources import (
    ARCSINE_TOFFOLI,
    CostModel,
    improvement_table,
    predicted_total_toffoli,
)
from .simulator import (
    DegenerateSpecError,
    NumericContractError,
    RegisterLayout,
    StateVector,
)
from .stateprep import (
    AASchedule,
    FPAASchedule,
    PrepResult,
    amplitude_amplification,
    fixed_point_schedule,
    prepare_cartesian_linear,
    prepare_cartesian_root,
    prepare_linear,
    prepare_polar,
    prepare_root,
    prepare_unitary_linear,
    schedule_rounds,
    transfer_profile,
    unif_inverse,
    unif_prime,
)

__version__ = "0.1.0"

__all__ = [
    "AASchedule",
    "ARCSINE_TOFFOLI",
    "AmplitudeSpec",
    "CostModel",
    "DegenerateSpecError",
    "FPAASchedule",
    "GateCounter",
    "NumericContractError",
    "PrepResult",
    "RegisterLayout",
    "StateVector",
    "amplitude_amplification",
    "comparator",
    "fixed_point_schedule",
    "improvement_table",
    "predicted_total_toffoli",
    "prepare_cartesian_linear",
    "prepare_cartesian_root",
    "prepare_linear",
    "prepare_polar",
    "prepare_root",
    "prepare_unitary_linear",
    "quantize",
    "schedule_rounds",
    "transfer_profile",
    "unif_inverse",
    "unif_prime",
]
