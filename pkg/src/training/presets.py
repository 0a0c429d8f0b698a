"""Named loss configurations of the ablation study and the descriptor selection experiment."""

from __future__ import annotations

from collections.abc import Mapping

from pydantic import BaseModel, Field

from ..config import Config, LossWeights
from ..descriptors.kinds import DescriptorKind

EMOTION_TERMS = ("af", "embed", "emog", "emod")
DEFAULT_KIND = DescriptorKind.SPECTRAL_KURTOSIS


class AblationPreset(BaseModel):
    """Which emotion-preserving terms a run switches on."""

    name: str
    terms: tuple[str, ...] = Field(default_factory=tuple)
    kinds: tuple[DescriptorKind, ...] = Field(default=(DEFAULT_KIND,))

    def weights(self, base: LossWeights | None = None) -> LossWeights:
        """``base`` with every emotion term outside this preset disabled."""
        base = base or LossWeights()
        inherited = [t for t in base.disabled if t not in EMOTION_TERMS]
        off = [t for t in EMOTION_TERMS if t not in self.terms]
        return base.model_copy(update={"disabled": inherited + off})

    def apply(self, cfg: Config) -> Config:
        descriptors = cfg.descriptors.model_copy(
            update={"active_kinds": [k.value for k in self.kinds]}
        )
        return cfg.model_copy(
            update={
                "losses": self.weights(cfg.losses),
                "descriptors": descriptors,
                "config_name": f"{cfg.config_name}+{self.name}",
            }
        )


PRESETS: dict[str, AblationPreset] = {
    "baseline": AblationPreset(name="baseline"),
    "emo_stargan": AblationPreset(name="emo_stargan", terms=EMOTION_TERMS),
    "embed_only": AblationPreset(name="embed_only", terms=("embed",)),
    "ce_only": AblationPreset(name="ce_only", terms=("emog", "emod")),
    "af_only": AblationPreset(name="af_only", terms=("af",)),
}


def get_preset(name: str) -> AblationPreset:
    """Look up a preset; ``af_<kind>`` selects the descriptor-only run for one kind."""
    if name in PRESETS:
        return PRESETS[name]
    if name.startswith("af_"):
        kind = DescriptorKind.parse(name[3:])
        return AblationPreset(name=name, terms=("af",), kinds=(kind,))
    known = ", ".join([*PRESETS, "af_<kind>"])
    raise ValueError(f"Unknown preset '{name}' (expected one of {known})")


def select_best_descriptor(
    results: Mapping[str | DescriptorKind, Mapping[str, float]],
) -> DescriptorKind:
    """Kind with the highest emotion accuracy on the originals; PCC breaks ties."""
    if not results:
        raise ValueError("no descriptor results to choose from")
    ranked = sorted(
        results.items(),
        key=lambda item: (item[1]["acc_orig"], item[1].get("pcc", float("-inf"))),
        reverse=True,
    )
    return DescriptorKind.parse(ranked[0][0])
