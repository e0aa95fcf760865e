"""Closed-form average fidelities of quantum operations, with Monte Carlo checks."""

from .channels import (
    KrausChannel,
    amplitude_damping_channel,
    apply,
    depolarizing_channel,
    make_channel,
    pad,
    remix,
    tensor_power,
    unitary_channel,
)
from .fidelity import (
    FidelityReport,
    SubspaceSelector,
    acceptance_probability,
    avg_kraus,
    avg_quadratic_form,
    avg_subspace,
    avg_unitary,
    composite_bruteforce_check,
    composite_fidelity,
    conditional_fidelity,
    worst_case_unitary,
)
from .haar import McEstimate, mc_channel_fidelity, mc_quadratic_form_average, sample_haar_state

__version__ = "0.1.0"
