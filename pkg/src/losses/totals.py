"""Weighted composition of the generator and discriminator objectives."""

from __future__ import annotations

import math
from collections.abc import Mapping

import torch
from pydantic import BaseModel, Field

from ..config import LossWeights

GENERATOR_TERMS = ("adv", "af", "embed", "emog", "aspk", "sty", "ds", "f0", "asr", "cyc")
DISCRIMINATOR_TERMS = ("adv", "emod", "spk")
# Sign of each weighted term inside the generator objective.
GENERATOR_SIGNS = {term: (-1.0 if term == "ds" else 1.0) for term in GENERATOR_TERMS}

Scalar = torch.Tensor | float


def _weight(weights: LossWeights, term: str) -> float:
    if term == "adv":
        return 1.0
    value = weights.weight(term)
    if value < 0:
        raise ValueError(f"loss weight for '{term}' is negative: {value}")
    return value


def _check_weights(weights: LossWeights, terms: tuple[str, ...]) -> None:
    for term in terms:
        _weight(weights, term)


def total_generator_loss(terms: Mapping[str, Scalar], weights: LossWeights) -> Scalar:
    """``adv + sum(lambda * term)`` with the diversity term subtracted.

    Terms with a zero effective weight may be absent from ``terms``.
    """
    _check_weights(weights, GENERATOR_TERMS)
    total: Scalar = 0.0
    for term in GENERATOR_TERMS:
        weight = _weight(weights, term)
        if weight == 0.0:
            continue
        if term not in terms:
            raise KeyError(f"active generator term '{term}' missing from the record")
        total = total + GENERATOR_SIGNS[term] * weight * terms[term]
    return total


def total_discriminator_loss(terms: Mapping[str, Scalar], weights: LossWeights) -> Scalar:
    """``-adv + lambda_emod * emod + lambda_spk * spk``."""
    _check_weights(weights, DISCRIMINATOR_TERMS)
    total: Scalar = -terms["adv"]
    for term in ("emod", "spk"):
        weight = _weight(weights, term)
        if weight == 0.0:
            continue
        if term not in terms:
            raise KeyError(f"active discriminator term '{term}' missing from the record")
        total = total + weight * terms[term]
    return total


class LossReport(BaseModel):
    """One training step's scalar terms and weighted totals, as written to the run log."""

    step: int = Field(ge=0)
    generator_terms: dict[str, float] = Field(default_factory=dict)
    discriminator_terms: dict[str, float] = Field(default_factory=dict)
    weights: LossWeights = Field(default_factory=LossWeights)
    l_g: float
    l_d: float
    flags: dict[str, bool] = Field(default_factory=dict)

    @classmethod
    def from_terms(
        cls,
        step: int,
        generator_terms: Mapping[str, Scalar],
        discriminator_terms: Mapping[str, Scalar],
        weights: LossWeights,
        flags: Mapping[str, bool] | None = None,
    ) -> LossReport:
        g = {k: float(v) for k, v in generator_terms.items()}
        d = {k: float(v) for k, v in discriminator_terms.items()}
        return cls(
            step=step,
            generator_terms=g,
            discriminator_terms=d,
            weights=weights,
            l_g=float(total_generator_loss(g, weights)),
            l_d=float(total_discriminator_loss(d, weights)),
            flags=dict(flags or {}),
        )

    def is_finite(self) -> bool:
        values = [*self.generator_terms.values(), *self.discriminator_terms.values()]
        return all(math.isfinite(v) for v in [*values, self.l_g, self.l_d])

    def verify(self, tol: float = 1e-6) -> bool:
        """Totals re-derived from the reported terms and weights agree within ``tol``."""
        l_g = float(total_generator_loss(self.generator_terms, self.weights))
        l_d = float(total_discriminator_loss(self.discriminator_terms, self.weights))
        return abs(l_g - self.l_g) <= tol and abs(l_d - self.l_d) <= tol

    def to_record(self) -> dict:
        return {
            "step": self.step,
            "L_G": self.l_g,
            "L_D": self.l_d,
            "G": self.generator_terms,
            "D": self.discriminator_terms,
            "flags": self.flags,
        }
