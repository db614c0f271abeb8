"""Continuous-time-safe trajectory planning for the kinematic bicycle model.

Three second-order cone programs are solved in sequence (spatial path,
trajectory duration, speed profile); the resulting B-spline pair is pushed
through the flat maps of the model to recover state and input trajectories
with machine-checkable safety certificates.
"""

__version__ = "0.1.0"
