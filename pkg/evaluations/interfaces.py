"""Pluggable transcriber and speaker verifier, with desk-scale defaults."""

from __future__ import annotations

from typing import Protocol

import numpy as np
import torch

from src.audio.mel import MelFrontEnd
from src.audio.toy import PHONES
from src.audio.types import Waveform
from src.config import Config
from src.descriptors.pitch import oracle_f0, voicing_mask
from src.models import LingNet


class Transcriber(Protocol):
    def __call__(self, waveform: Waveform) -> str: ...


class Verifier(Protocol):
    def __call__(self, enrolment: Waveform, trial: Waveform) -> float: ...


class LingNetTranscriber:
    """Frame-wise symbol argmax with repeats collapsed, spelled with the toy phone set."""

    def __init__(self, ling_net: LingNet, cfg: Config, symbols: tuple[str, ...] = PHONES):
        self.ling_net = ling_net.eval()
        self.front_end = MelFrontEnd(cfg.audio)
        self.symbols = symbols

    @torch.no_grad()
    def __call__(self, waveform: Waveform) -> str:
        mel = torch.from_numpy(self.front_end.log_mel(waveform).values.astype(np.float32))
        decoded = self.ling_net.decode(mel.unsqueeze(0))[0]
        return "".join(self.symbols[i] for i in decoded)


class VoiceprintVerifier:
    """Cosine similarity of centred voiced-frame log-mel statistics plus pitch level."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.front_end = MelFrontEnd(cfg.audio)

    def voiceprint(self, waveform: Waveform) -> np.ndarray:
        log_mel = self.front_end.log_mel(waveform).values
        contour = oracle_f0(waveform, self.cfg.audio)
        voiced = voicing_mask(contour, self.cfg.descriptors.conf_threshold).voiced
        frames = log_mel[:, voiced[: log_mel.shape[1]]] if voiced.any() else log_mel
        pitch = np.log(np.median(contour.f0_hz[voiced])) if voiced.any() else 0.0
        vector = np.concatenate([frames.mean(axis=1), frames.std(axis=1), [pitch]])
        return vector - vector.mean()

    def __call__(self, enrolment: Waveform, trial: Waveform) -> float:
        a = self.voiceprint(enrolment)
        b = self.voiceprint(trial)
        denom = float(np.linalg.norm(a) * np.linalg.norm(b))
        return float(a @ b / denom) if denom > 0 else 0.0
