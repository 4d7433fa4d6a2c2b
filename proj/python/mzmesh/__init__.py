"""Differentiable transfer-matrix simulation and gradient-based design of
custom Mach-Zehnder interferometer meshes."""

from ._core import (  # noqa: F401
    CouplerPoint,
    CouplerSpectrum,
    DesignObjective,
    DesignSpec,
    DeviceKind,
    DeviceState,
    EffectiveIndexModel,
    GradientReport,
    InitConfig,
    NetworkTopology,
    OptimizationTrace,
    RunResult,
    StopReason,
    StudyRow,
    TaperProfile,
    ToleranceReport,
    TracePoint,
    __version__,
    apply_etch_offset,
    build_coupler_table,
    build_targets,
    build_topology,
    coupler_response,
    effective_index,
    etch_sweep,
    evaluate_objective,
    finite_difference_check,
    gradient,
    initial_device,
    initialize_parameters,
    interpolate_coupler,
    layer_study,
    learning_rate,
    make_device,
    network_scatter,
    parse_design_spec,
    read_coupler_csv,
    read_geometry_json,
    regularization_penalty,
    run_optimization,
    serialize_design_spec,
    simulate_spectrum,
    taper_phase,
    trainable_parameter_count,
    write_coupler_csv,
    write_geometry_json,
    write_spectrum_csv,
)
