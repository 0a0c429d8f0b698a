"""Pre-training, adversarial training, checkpoints and conversion."""

from .checkpoint import TrainState, load_checkpoint, load_component, save_checkpoint
from .convert import convert, convert_mel, convert_split
from .data import Batch, Clip, ClipDataset
from .presets import PRESETS, AblationPreset, get_preset, select_best_descriptor
from .pretrain import pretrain_f0, pretrain_ling
from .steps import AdversarialStepper, set_phase
from .trainer import VCTrainer, attach_frozen, make_optimizers, train_vc

__all__ = [
    "PRESETS",
    "AblationPreset",
    "AdversarialStepper",
    "Batch",
    "Clip",
    "ClipDataset",
    "TrainState",
    "VCTrainer",
    "attach_frozen",
    "convert",
    "convert_mel",
    "convert_split",
    "get_preset",
    "load_checkpoint",
    "load_component",
    "make_optimizers",
    "pretrain_f0",
    "pretrain_ling",
    "save_checkpoint",
    "select_best_descriptor",
    "set_phase",
    "train_vc",
]
