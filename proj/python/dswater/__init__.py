"""Evidential water detection on multi-spectral rasters."""

from ._core import (
    DswaterError,
    analyze_threshold,
    decide,
    default_pipeline_config,
    default_scene_spec,
    generate_scene,
    load_raster,
    pignistic,
    run_pipeline,
    save_raster,
    score,
    spectral_masses,
    supervised_singleton_mass,
)

__all__ = [
    "DswaterError",
    "analyze_threshold",
    "decide",
    "default_pipeline_config",
    "default_scene_spec",
    "generate_scene",
    "load_raster",
    "pignistic",
    "run_pipeline",
    "save_raster",
    "score",
    "spectral_masses",
    "supervised_singleton_mass",
]
