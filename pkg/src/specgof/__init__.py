"""Spectral goodness-of-fit tests for parametric time series models."""
from .gof import ProcessPath, backward_residuals, beta_process, beta_tapered, forward_residuals, tp_process
from .mc import MCConfig, MCReport, render_report, run_experiment
from .models import FAMILIES, get_family, gamma_theta, h_theta, phi_theta
from .pipeline import run_pipeline
from .seriesio import read_series, write_series
from .sim import DgpSpec, local_alternative, simulate
from .spectral import periodogram, tapered_periodogram
from .stats import TestReport, cvm_stat, directional_stat, ks_stat, smooth_stat
from .whittle import WhittleFit, whittle_fit

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "DgpSpec", "MCConfig", "MCReport", "ProcessPath", "TestReport", "WhittleFit",
    "backward_residuals", "beta_process", "beta_tapered", "cvm_stat", "directional_stat",
    "forward_residuals", "gamma_theta", "get_family", "h_theta", "ks_stat", "local_alternative",
    "periodogram", "phi_theta", "read_series", "render_report", "run_experiment", "run_pipeline",
    "simulate", "smooth_stat", "tapered_periodogram", "tp_process", "whittle_fit", "write_series",
]
