"""Quantum Fisher information, its growth bound and operator spreading in
spin-1/2 sensing chains, by exact diagonalization and by free fermions."""

__version__ = "0.1.0"

from .operators import (  # noqa: E402
    Family,
    ModelSpec,
    PauliString,
    ProductStateSpec,
    build_hamiltonian,
    local_sensing_terms,
    realize_pauli_string,
    realize_product_state,
)
from .ed import (  # noqa: E402
    CovarianceMap,
    EigenDecomposition,
    Probe,
    QfiRecord,
    covariance_map,
    eigendecompose,
    gamma_rate,
    generator,
    long_time_qfi_density,
    qfi,
    verify_growth_bound,
)
from .freefermion import (  # noqa: E402
    EtaTable,
    QuenchSpec,
    eta_closed_form,
    eta_table,
    qfi_product_state_ff,
    quench_asymptote_closed,
    quench_asymptote_ksum,
)
from .scaling import Regime, ScalingFit, classify, fit_scaling_exponent  # noqa: E402
from ._kernels import BACKEND  # noqa: E402
