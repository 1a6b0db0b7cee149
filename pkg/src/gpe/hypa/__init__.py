"""Hybrid PTX analysis: exact dynamic instruction mixes without a GPU."""

from gpe.hypa.analyzer import Unknown, analyze, analyze_kernel, control_slice
from gpe.hypa.interpreter import interpret
from gpe.hypa.mix import (
    MIX_FEATURE_NAMES,
    AnalysisConfig,
    BranchPolicy,
    InstructionMix,
    LaunchConfig,
    mix_to_features,
    scale_to_launch,
)

__all__ = [
    "MIX_FEATURE_NAMES", "AnalysisConfig", "BranchPolicy", "InstructionMix", "LaunchConfig",
    "Unknown", "analyze", "analyze_kernel", "control_slice", "interpret", "mix_to_features",
    "scale_to_launch",
]
