"""Python access to the corrective shared autonomy core."""

from ._csa import (
    ConfigError,
    RuntimeFault,
    Surface,
    execution_time_constant,
    fit,
    input_time,
    load_demonstration,
    metrics,
    read_trace,
    rollout,
    run,
    step_correction,
    task_files,
)

__all__ = [
    "ConfigError",
    "RuntimeFault",
    "Surface",
    "execution_time_constant",
    "fit",
    "input_time",
    "load_demonstration",
    "metrics",
    "read_trace",
    "rollout",
    "run",
    "step_correction",
    "task_files",
]
