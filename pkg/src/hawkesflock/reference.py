"""Reference parameter sets for the simulation-recovery benchmark.

Three presets, each with the dispersion (standard deviation across 500
replicated estimations) used to size the recovery tolerances.  Arrays follow
the canonical parameter order of `core.PARAM_NAMES`.
"""

from __future__ import annotations

import numpy as np

from .core import FlockParams

__all__ = ["RECOVERY_COLUMNS", "recovery_tolerance"]

# (true parameters, reference std of the 500-path estimator)
RECOVERY_COLUMNS: dict[int, dict] = {
    1: {
        "params": FlockParams(
            mu1=0.0800, beta1=0.6000, alpha1s=0.4000, alpha1c=0.0000,
            alpha1n=0.0000, alpha1w=0.2000,
            mu2=0.0500, beta2=1.2000, alpha2s=0.5000, alpha2c=0.3000,
            alpha2n=0.0000, alpha2w=0.1000,
        ),
        "std": np.array([0.0039, 0.0212, 0.0083, 0.0141, 0.0124, 0.0142,
                         0.0023, 0.0446, 0.0242, 0.0178, 0.0105, 0.0115]),
    },
    2: {
        "params": FlockParams(
            mu1=0.0500, beta1=1.0500, alpha1s=0.1500, alpha1c=0.4000,
            alpha1n=0.2000, alpha1w=0.3500,
            mu2=0.0700, beta2=1.3000, alpha2s=0.4500, alpha2c=0.2500,
            alpha2n=0.3500, alpha2w=0.1000,
        ),
        "std": np.array([0.0025, 0.0368, 0.0140, 0.0168, 0.0206, 0.0200,
                         0.0027, 0.0465, 0.0213, 0.0142, 0.0269, 0.0162]),
    },
    3: {
        "params": FlockParams(
            mu1=0.1000, beta1=0.9000, alpha1s=0.2000, alpha1c=0.2000,
            alpha1n=0.3000, alpha1w=0.3500,
            mu2=0.1200, beta2=1.1500, alpha2s=0.3000, alpha2c=0.6000,
            alpha2n=0.0000, alpha2w=0.1000,
        ),
        "std": np.array([0.0074, 0.0402, 0.0176, 0.0157, 0.0324, 0.0247,
                         0.0072, 0.0467, 0.0224, 0.0282, 0.0215, 0.0216]),
    },
}


def recovery_tolerance(column: int, n_paths: int) -> np.ndarray:
    """Per-parameter bound on |mean estimate - truth|: three reference stds
    rescaled from 500 replications to n_paths, floored at 0.01."""
    std = RECOVERY_COLUMNS[column]["std"]
    return np.maximum(3.0 * std * np.sqrt(500.0 / n_paths), 0.01)
