"""Runtime knobs shared by the reduction engine, the solver and the CLI."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RunConfig:
    search_bound: int = 64        # fallback box half-width for free exponents
    enumeration_cap: int = 10**6  # simple path/cycle and product-size cap
    trace: int = 0                # 0 silent, 1 milestones, 2 chatty
    seed: int = 0                 # RNG seed for sampling-style self tests
    template_cap: int = 200_000   # max templates in one bounded language
    enum_cells: int = 1_000_000   # lattice points enumerated in bounded polytopes

    def __post_init__(self):
        for name in ("search_bound", "enumeration_cap", "template_cap", "enum_cells"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT = RunConfig()
