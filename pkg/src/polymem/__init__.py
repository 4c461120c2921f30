"""Leaky and gated recurrent cells with polynomial memory decay.

From-scratch sequence-model library: exact one-step cells and Jacobians,
full-length backpropagation through time with per-timestep input-gradient
diagnostics, continuous-time decay oracles, and a small training harness
with an accompanying CLI (``polymem``).
"""

from .bptt import Gradients, Trajectory, backward_sequence, forward_sequence, \
    input_gradient_norms
from .cells import GatedParams, GruParams, LeakyParams, jacobian_step, step
from .diagnostics import DecayFit, GradProfile, classify_decay, \
    fit_exponential, fit_polynomial
from .ode import DecayLaw, characteristic_time, euler_integrate, \
    exp_decay_solution, poly_decay_sensitivity, poly_decay_solution

__version__ = "0.1.0"

__all__ = [
    "DecayFit", "DecayLaw", "GatedParams", "GradProfile", "Gradients",
    "GruParams", "LeakyParams", "Trajectory", "backward_sequence",
    "characteristic_time", "classify_decay", "euler_integrate",
    "exp_decay_solution", "fit_exponential", "fit_polynomial",
    "forward_sequence", "input_gradient_norms", "jacobian_step",
    "poly_decay_sensitivity", "poly_decay_solution", "step",
]
