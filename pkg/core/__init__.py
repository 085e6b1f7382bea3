"""
Core package: spacetime paths, gauge physicality and Monte Carlo sampling
"""

from core.errors import (
    GaugeSimError, PathError, SpacelikeSegmentError, InvalidEndpointError, ScreenGeometryError,
    GeometryError, InsufficientFringesError, WaveInstabilityError, EmptyRegionError,
    LatticeTooLargeError, ConfigError
)
from core.models import (
    ActionMode, Projection, PotentialKind, IntrusionMode, IntrusionStage, Estimator, OracleMode,
    Event, Segment, Path, ParticleParams, PotentialSpec, PhaseState, PhaseResidual, DensityParams,
    SamplerConfig, SeedSpec, ScreenSpec, IntrusionSpec, EprSpec, ExperimentConfig, DensityProfile,
    TunnelingReport, WaveField, MadelungFields, LatticeSpec, RunManifest
)
from core.spacetime import segment_action_rel, path_action, path_length, decompose, recombine, reduced_action
from core.gauge import (
    phase_residual, is_physical, pair_is_physical, quantized_radii, neighborhood_density,
    density_integral, calibrate_density_params
)
from core.sampler import (
    sample_paths, project_to_physical, projection_scales, band_filter, filter_residuals, accumulate_screen,
    ScreenHistogram, map_streams
)

__all__ = [
    'GaugeSimError', 'PathError', 'SpacelikeSegmentError', 'InvalidEndpointError', 'ScreenGeometryError',
    'GeometryError', 'InsufficientFringesError', 'WaveInstabilityError', 'EmptyRegionError',
    'LatticeTooLargeError', 'ConfigError',
    'ActionMode', 'Projection', 'PotentialKind', 'IntrusionMode', 'IntrusionStage', 'Estimator', 'OracleMode',
    'Event', 'Segment', 'Path', 'ParticleParams', 'PotentialSpec', 'PhaseState', 'PhaseResidual',
    'DensityParams', 'SamplerConfig', 'SeedSpec', 'ScreenSpec', 'IntrusionSpec', 'EprSpec',
    'ExperimentConfig', 'DensityProfile', 'TunnelingReport', 'WaveField', 'MadelungFields',
    'LatticeSpec', 'RunManifest',
    'segment_action_rel', 'path_action', 'path_length', 'decompose', 'recombine', 'reduced_action',
    'phase_residual', 'is_physical', 'pair_is_physical', 'quantized_radii', 'neighborhood_density',
    'density_integral', 'calibrate_density_params',
    'sample_paths', 'project_to_physical', 'projection_scales', 'band_filter', 'filter_residuals',
    'accumulate_screen', 'ScreenHistogram', 'map_streams',
]
