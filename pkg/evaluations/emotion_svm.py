"""Support-vector emotion classifier over per-utterance descriptor functionals."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC

from src.audio.mel import MelFrontEnd
from src.audio.types import Waveform
from src.config import Config
from src.descriptors.kinds import ALL_KINDS
from src.descriptors.oracles import oracle_series
from src.descriptors.pitch import F0Contour, oracle_f0, voicing_mask

logger = logging.getLogger(__name__)


def functionals(values: Sequence[float], percentiles: Sequence[float]) -> list[float]:
    """mean, std and percentiles of a series (zeros for an empty one)."""
    if len(values) == 0:
        return [0.0] * (2 + len(percentiles))
    arr = np.asarray(values, dtype=np.float64)
    return [float(arr.mean()), float(arr.std()), *np.percentile(arr, percentiles).tolist()]


def utterance_features(
    waveform: Waveform, cfg: Config, contour: F0Contour | None = None
) -> np.ndarray:
    """Descriptor-oracle functionals followed by per-band log-mel mean and std."""
    front_end = MelFrontEnd(cfg.audio)
    log_mel = front_end.log_mel(waveform).values
    contour = contour or oracle_f0(waveform, cfg.audio)
    voiced = voicing_mask(contour, cfg.descriptors.conf_threshold).voiced
    percentiles = cfg.evaluation.percentiles

    features: list[float] = []
    for kind in ALL_KINDS:
        series = oracle_series(
            kind.value,
            log_mel,
            front_end.center_freqs,
            voiced,
            cfg.descriptors.window_len,
            f0=contour.f0_hz,
            eps=cfg.descriptors.eps,
            floor=cfg.audio.floor,
        )
        features += functionals([value for _, value in series], percentiles)
    features += log_mel.mean(axis=1).tolist() + log_mel.std(axis=1).tolist()
    return np.asarray(features, dtype=np.float64)


class EmotionSVM:
    """Standardised features into a radial-basis SVC."""

    def __init__(self, c: float = 10.0, gamma: str | float = "scale"):
        self.pipeline = Pipeline(
            [("scaler", StandardScaler()), ("svc", SVC(kernel="rbf", C=c, gamma=gamma))]
        )
        self.fitted = False

    @property
    def classes(self) -> list[str]:
        return list(self.pipeline.named_steps["svc"].classes_) if self.fitted else []

    def fit(self, features: np.ndarray, labels: Sequence[str]) -> EmotionSVM:
        if len(set(labels)) < 2:
            raise ValueError("the SVM needs at least two emotion classes")
        self.pipeline.fit(np.asarray(features), list(labels))
        self.fitted = True
        logger.info(f"Emotion SVM fitted on {len(labels)} utterances, classes={self.classes}")
        return self

    def predict(self, features: np.ndarray) -> list[str]:
        if not self.fitted:
            raise RuntimeError("EmotionSVM.predict called before fit")
        return [str(p) for p in self.pipeline.predict(np.atleast_2d(features))]


def train_emotion_svm(
    waveforms: Sequence[Waveform], labels: Sequence[str], cfg: Config
) -> EmotionSVM:
    features = np.stack([utterance_features(w, cfg) for w in waveforms])
    return EmotionSVM(cfg.evaluation.svm_c, cfg.evaluation.svm_gamma).fit(features, labels)


def svm_accuracies(
    svm: EmotionSVM,
    source_features: np.ndarray,
    converted_features: np.ndarray,
    labels: Sequence[str],
) -> tuple[float, float]:
    """(Acc_orig, Acc_svm) as fractions.

    Acc_orig scores the predictions on the conversions against the given
    labels; Acc_svm against the predictions on the sources.
    """
    unknown = sorted(set(labels) - set(svm.classes))
    if unknown:
        raise ValueError(f"emotion classes absent from the SVM training corpus: {unknown}")
    on_source = svm.predict(source_features)
    on_converted = svm.predict(converted_features)
    acc_orig = float(np.mean([p == y for p, y in zip(on_converted, labels, strict=True)]))
    acc_svm = float(np.mean([p == s for p, s in zip(on_converted, on_source, strict=True)]))
    return acc_orig, acc_svm
