"""Phase retrieval by Bures-Wasserstein gradient descent with dynamic smoothing."""

from ._bwretrieve import (
    BwretrieveError,
    Ensemble,
    amplitude_loss,
    bwgd_ds_step,
    constant_unit_signal,
    generate_ensemble,
    newton_step,
    quantile,
    random_init,
    run,
    run_suite,
    smoothed_gradient,
    smoothed_hessian,
    smoothed_loss,
    spectral_init,
    suite_names,
    synthesize_measurements,
    unwhiten,
)

__all__ = [
    "BwretrieveError",
    "Ensemble",
    "amplitude_loss",
    "bwgd_ds_step",
    "constant_unit_signal",
    "generate_ensemble",
    "newton_step",
    "quantile",
    "random_init",
    "run",
    "run_suite",
    "smoothed_gradient",
    "smoothed_hessian",
    "smoothed_loss",
    "spectral_init",
    "suite_names",
    "synthesize_measurements",
    "unwhiten",
]
