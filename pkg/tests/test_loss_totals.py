"""Weighted composition of the generator and discriminator objectives."""

from __future__ import annotations

import math

import pytest
import torch

from src.config import LossWeights
from src.losses import GENERATOR_TERMS, LossReport, total_discriminator_loss, total_generator_loss

TERMS = {name: float(i + 1) for i, name in enumerate(GENERATOR_TERMS)}


def test_generator_total_weights_every_term():
    weights = LossWeights()

    total = total_generator_loss(TERMS, weights)

    expected = TERMS["adv"] + sum(
        (-1.0 if t == "ds" else 1.0) * weights.weight(t) * TERMS[t]
        for t in GENERATOR_TERMS
        if t != "adv"
    )
    assert total == pytest.approx(expected)


def test_diversity_enters_negatively():
    weights = LossWeights()
    more_diverse = {**TERMS, "ds": TERMS["ds"] + 1.0}

    assert total_generator_loss(more_diverse, weights) == pytest.approx(
        total_generator_loss(TERMS, weights) - weights.lambda_ds
    )


def test_zero_weight_terms_may_be_absent():
    weights = LossWeights(disabled=["af", "embed", "emog"], lambda_f0=0.0)
    terms = {k: v for k, v in TERMS.items() if k not in {"af", "embed", "emog", "f0"}}

    assert math.isfinite(total_generator_loss(terms, weights))


def test_missing_active_term_raises():
    terms = {k: v for k, v in TERMS.items() if k != "cyc"}

    with pytest.raises(KeyError, match="cyc"):
        total_generator_loss(terms, LossWeights())


def test_baseline_weights_reduce_to_inherited_objective():
    baseline = LossWeights(disabled=["af", "embed", "emog", "emod"])
    inherited = {k: v for k, v in TERMS.items() if k not in {"af", "embed", "emog"}}

    assert total_generator_loss(TERMS, baseline) == pytest.approx(
        total_generator_loss(inherited, baseline)
    )


def test_discriminator_total():
    weights = LossWeights()
    terms = {"adv": -1.2, "emod": 0.7, "spk": 0.4}

    total = total_discriminator_loss(terms, weights)

    assert total == pytest.approx(1.2 + 0.01 * 0.7 + 0.1 * 0.4)
    with pytest.raises(KeyError, match="emod"):
        total_discriminator_loss({"adv": -1.2, "spk": 0.4}, weights)


def test_totals_keep_gradients():
    adv = torch.tensor(0.5, requires_grad=True)
    terms = {**{k: torch.tensor(v) for k, v in TERMS.items()}, "adv": adv}

    total_generator_loss(terms, LossWeights()).backward()

    assert float(adv.grad) == 1.0


def test_report_totals_are_recomputable():
    d_terms = {"adv": -1.0, "emod": 0.3, "spk": 0.2}
    report = LossReport.from_terms(7, TERMS, d_terms, LossWeights(), {"emotion_labels": True})

    assert report.verify()
    assert report.is_finite()
    record = report.to_record()
    assert record["step"] == 7
    assert record["L_G"] == pytest.approx(total_generator_loss(TERMS, LossWeights()))
    assert record["flags"] == {"emotion_labels": True}

    tampered = report.model_copy(update={"l_g": report.l_g + 1.0})
    assert not tampered.verify()


def test_report_detects_non_finite_terms():
    report = LossReport.from_terms(
        1, {**TERMS, "cyc": float("nan")}, {"adv": 0.0, "emod": 0.0, "spk": 0.0}, LossWeights()
    )

    assert not report.is_finite()
