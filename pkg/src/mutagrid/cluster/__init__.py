"""Cluster execution: deterministic simulation and a real localhost runtime."""

from ..costmodel import DEFAULT_COST_MODEL, ZERO_OVERHEAD, CostModel
from .sim import ClusterSpec, ScheduleTrace, simulate_job

__all__ = ["CostModel", "DEFAULT_COST_MODEL", "ZERO_OVERHEAD", "ClusterSpec",
           "ScheduleTrace", "simulate_job"]
