"""End-to-end steps driven by a :class:`~raidd.config.Config`: eigenvalue pool,
plant family, robust condition check and controller synthesis."""
from __future__ import annotations

from dataclasses import dataclass

from .graphs import EigenvaluePool, build_eigenvalue_pool
from .nugap import central_plant
from .synthesis import (Controller, MarginReport, PlantFamily, build_plant_family,
                        check_conditions, generalized_stability_margin, max_stability_margin,
                        synthesize_controller)

__all__ = ["SynthesisOutcome", "eigenvalue_pool", "plant_family", "margin_report", "synthesize"]


@dataclass
class SynthesisOutcome:
    controller: Controller
    margin: float
    b_max: float
    eps_cp: float
    cp_index: int
    lambda_cp: float
    gamma_rel: float

    def to_dict(self):
        d = self.controller.to_dict()
        d.update({"achieved_margin": self.margin, "b_max": self.b_max, "eps_cp": self.eps_cp,
                  "cp_index": self.cp_index, "lambda_cp": self.lambda_cp,
                  "gamma_rel": self.gamma_rel})
        return d


def eigenvalue_pool(cfg, bank: str | None = None) -> EigenvaluePool:
    return build_eigenvalue_pool(cfg.bank(bank))


def plant_family(cfg, pool: EigenvaluePool | None = None) -> PlantFamily:
    P = cfg.agent()
    pool = pool if pool is not None else eigenvalue_pool(cfg)
    return build_plant_family(P.A, P.B, P.C, pool)


def margin_report(cfg, grid: int | None = None):
    """Plant family and :class:`MarginReport` over the configured perturbation box."""
    family = plant_family(cfg)
    report = check_conditions(family, cfg.box(grid), workers=cfg.workers,
                              settings=cfg.settings())
    return family, report


def synthesize(cfg, gamma_rel: float | None = None,
               report: MarginReport | None = None) -> SynthesisOutcome:
    """Synthesize the protocol for the central plant of the configured family."""
    settings = cfg.settings()
    gamma_rel = cfg.gamma_rel if gamma_rel is None else gamma_rel
    family = plant_family(cfg)
    if report is None:
        cp_index, eps_cp = central_plant(family, workers=cfg.workers, settings=settings)
        b_max = max_stability_margin(family.plants[cp_index], settings=settings)
    else:
        cp_index, eps_cp, b_max = report.cp_index, report.eps_cp, report.b_max
    P_cp = family.plants[cp_index]
    K = synthesize_controller(P_cp, gamma_rel=gamma_rel, settings=settings)
    return SynthesisOutcome(
        controller=K, margin=generalized_stability_margin(P_cp, K, settings), b_max=b_max,
        eps_cp=eps_cp, cp_index=cp_index, lambda_cp=float(family.lambdas[cp_index]),
        gamma_rel=gamma_rel,
    )
