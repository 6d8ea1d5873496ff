"""Stoichiometric neural-ODE models with per-process neural networks.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (  # noqa: F401
    Activation,
    BinodeModel,
    Dataset,
    FitResult,
    IntegratorConfig,
    Nnp,
    NnpSpec,
    OutputActivation,
    ProcessSurface,
    RateLaw,
    Segment,
    StoichiometricLayer,
    TrainConfig,
    TrainResult,
    Trajectory,
    __version__,
    build_lv_binode,
    build_monod_binode,
    build_pk_binode,
    build_ssystem_binode,
    build_ultradian_binode,
    extract_surface,
    fit_surface,
    generate_training_set,
    init_nnp,
    integrate_model,
    load_model,
    make_rate_law,
    model_from_json,
    model_to_json,
    nnp_from_json,
    nnp_to_json,
    power_law,
    rollout_loss,
    sample_dataset,
    sample_segments,
    save_model,
    simulate_reference,
    train,
)
