"""Voice-conversion training loop with checkpointing and deterministic resumption."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import torch

from ..audio.manifest import DatasetManifest
from ..audio.mel import MelFrontEnd
from ..config import Config, snapshot_config
from ..embedding.extractor import EmbeddingExtractor
from ..errors import DatasetError, NonFiniteLossError
from ..logging_config import StepLogWriter
from ..losses import LossReport
from ..models import GENERATOR_SIDE, ModelBundle, StyleEncoder, build_bundle, trainable_components
from .checkpoint import TrainState, load_checkpoint, load_component, save_checkpoint
from .data import Batch, ClipDataset
from .steps import AdversarialStepper, set_phase

logger = logging.getLogger(__name__)

LATEST = "latest"
STEP_LOG = "steps.jsonl"


def configure_determinism(cfg: Config) -> None:
    if cfg.training.deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)
        torch.backends.cudnn.benchmark = False


def attach_frozen(bundle: ModelBundle, cfg: Config, load: bool = True) -> ModelBundle:
    """Load the pre-trained pitch, linguistic and embedding networks and freeze them.

    With ``load=False`` the networks already in the bundle (e.g. from a
    checkpoint) are only frozen.
    """
    if load:
        _load_frozen(bundle, cfg)
    for module in (bundle.f0_net, bundle.ling_net, bundle.extractor):
        if module is None:
            continue
        for p in module.parameters():
            p.requires_grad_(False)
        module.eval()
    return bundle


def _load_frozen(bundle: ModelBundle, cfg: Config) -> None:
    run = cfg.training
    if run.f0_checkpoint:
        load_component(run.f0_checkpoint, bundle.f0_net)
    else:
        logger.warning("No f0_checkpoint configured; the pitch network stays at its initial state")
    if run.ling_checkpoint:
        load_component(run.ling_checkpoint, bundle.ling_net)
    else:
        logger.warning("No ling_checkpoint configured; the linguistic network is untrained")

    if cfg.losses.is_active("embed") and bundle.extractor is None:
        extractor = EmbeddingExtractor(StyleEncoder(cfg.models.n_emotions, cfg.models))
        if run.extractor_checkpoint:
            load_component(run.extractor_checkpoint, extractor)
        else:
            logger.warning(
                "No extractor_checkpoint configured; embedding loss uses a random extractor"
            )
        bundle.extractor = extractor


def make_optimizers(bundle: ModelBundle, cfg: Config) -> dict[str, torch.optim.Optimizer]:
    """AdamW for the generator side and for the discriminator side."""
    trainable = trainable_components(cfg.losses)

    def adamw(names: list[str]) -> torch.optim.Optimizer:
        return torch.optim.AdamW(
            bundle.parameters_of(names),
            lr=cfg.training.learning_rate,
            betas=cfg.training.betas,
            weight_decay=cfg.training.weight_decay,
        )

    generator_side = [n for n in GENERATOR_SIDE if n in trainable]
    discriminator_side = [n for n in trainable if n not in GENERATOR_SIDE]
    return {"generator": adamw(generator_side), "discriminator": adamw(discriminator_side)}


def _clip(optimizer: torch.optim.Optimizer, max_norm: float | None) -> None:
    if max_norm is None:
        return
    params = [p for group in optimizer.param_groups for p in group["params"]]
    torch.nn.utils.clip_grad_norm_(params, max_norm)


def _scalars(terms: dict[str, torch.Tensor]) -> dict[str, float]:
    return {name: float(value.detach()) for name, value in terms.items()}


class VCTrainer:
    """Owns a :class:`TrainState` and advances it one step at a time."""

    def __init__(
        self,
        cfg: Config,
        dataset: ClipDataset,
        out_dir: str | Path,
        state: TrainState | None = None,
        use_f0: bool = True,
        use_speaker_classifier: bool = True,
        name: str = "vc",
        n_domains: int | None = None,
    ):
        self.cfg = cfg
        self.dataset = dataset
        self.out_dir = Path(out_dir)
        self.name = name
        self.use_speaker_classifier = use_speaker_classifier
        self.trainable = trainable_components(cfg.losses)
        self.device = torch.device(cfg.training.device)

        if state is None:
            n_domains = n_domains or max(dataset.speakers) + 1
            bundle = build_bundle(cfg, n_domains, use_f0=use_f0)
            state = TrainState(
                bundle=bundle,
                numpy_rng=np.random.default_rng(cfg.training.seed),
                torch_rng=torch.Generator().manual_seed(cfg.training.seed),
                use_f0=use_f0,
            )
            attach_frozen(bundle, cfg)
        else:
            attach_frozen(state.bundle, cfg, load=False)
        self.state = state
        state.bundle.to(self.device)
        if not state.optimizers:
            state.optimizers = make_optimizers(state.bundle, cfg)

        self.stepper = AdversarialStepper(
            state.bundle,
            cfg,
            MelFrontEnd(cfg.audio).center_freqs,
            use_f0=state.use_f0,
            use_speaker_classifier=use_speaker_classifier,
        )
        self.stepper.domains = torch.tensor(dataset.speakers)
        self.log = StepLogWriter(self.out_dir / STEP_LOG)
        self.steps_per_epoch = max(1, math.ceil(len(dataset) / cfg.training.batch_size))

    @property
    def total_steps(self) -> int:
        run = self.cfg.training
        return run.max_steps or run.epochs * self.steps_per_epoch

    def _references(self, rng: np.random.Generator, codes: torch.Tensor) -> torch.Tensor:
        return self.dataset.sample_for_speakers(rng, codes)

    def _check_finite(self, loss: torch.Tensor, phase: str, batch: Batch) -> None:
        if torch.isfinite(loss).all():
            return
        snapshot = self.out_dir / "nonfinite" / f"step_{self.state.step + 1:06d}"
        save_checkpoint(self.state, snapshot, self.cfg)
        torch.save({"mel": batch.mel.cpu(), "speaker": batch.speaker.cpu()}, snapshot / "batch.pt")
        bad = self.state.bundle.non_finite_components()
        raise NonFiniteLossError(
            f"non-finite {phase} loss at step {self.state.step + 1} "
            f"(non-finite parameters in: {bad or 'none'})",
            snapshot_dir=str(snapshot),
        )

    def train_step(self, batch: Batch | None = None) -> LossReport:
        """Discriminator phase then generator phase; returns the step's report."""
        state = self.state
        run = self.cfg.training
        if batch is None:
            batch = self.dataset.sample_batch(state.numpy_rng, run.batch_size)
        batch = batch.to(self.device)
        bundle = state.bundle
        for name in (*GENERATOR_SIDE, "discriminator", "speaker_classifier", "emotion_classifier"):
            getattr(bundle, name).train()

        set_phase(bundle, "discriminator", self.trainable)
        for _ in range(run.d_steps_per_g):
            draws = self.stepper.draw(batch, state.torch_rng, self._references, state.numpy_rng)
            d_result = self.stepper.discriminator_phase(batch, draws)
            self._check_finite(d_result.loss, "discriminator", batch)
            optimizer = state.optimizers["discriminator"]
            optimizer.zero_grad(set_to_none=True)
            d_result.loss.backward()
            _clip(optimizer, run.grad_clip)
            optimizer.step()

        set_phase(bundle, "generator", self.trainable)
        g_result = self.stepper.generator_phase(batch, draws)
        self._check_finite(g_result.loss, "generator", batch)
        optimizer = state.optimizers["generator"]
        optimizer.zero_grad(set_to_none=True)
        g_result.loss.backward()
        _clip(optimizer, run.grad_clip)
        optimizer.step()

        state.step += 1
        state.epoch = (state.step - 1) // self.steps_per_epoch
        bundle.step = state.step
        flags = {**d_result.flags, **g_result.flags}
        return LossReport.from_terms(
            state.step,
            _scalars(g_result.terms),
            _scalars(d_result.terms),
            self.stepper.weights,
            flags,
        )

    def checkpoint(self) -> Path:
        directory = save_checkpoint(self.state, self.out_dir / "checkpoints" / LATEST, self.cfg)
        self._dump_sample()
        return directory

    def _dump_sample(self) -> None:
        """Converted mel of the first training clip, for listening checks."""
        bundle = self.state.bundle
        clip = self.dataset.clips[0]
        mel = torch.from_numpy(clip.mel).unsqueeze(0).to(self.device)
        target = torch.tensor([(clip.speaker_code + 1) % bundle.n_domains], device=self.device)
        with torch.no_grad():
            features = bundle.f0_net(mel)[1] if self.state.use_f0 else None
            latent = bundle.mapping.sample_latent(1, torch.Generator().manual_seed(0))
            style = bundle.mapping(latent.to(self.device), target)
            converted = bundle.generator(mel, features, style)
        path = self.out_dir / "samples" / f"{self.name}_step_{self.state.step:06d}.npy"
        path.parent.mkdir(parents=True, exist_ok=True)
        np.save(path, converted[0].cpu().numpy())

    def fit(self, max_steps: int | None = None) -> TrainState:
        """Run until ``max_steps`` (or the configured schedule) is reached."""
        run = self.cfg.training
        last = max_steps or self.total_steps
        logger.info(f"[{self.name}] training from step {self.state.step} to {last}")
        while self.state.step < last:
            report = self.train_step()
            if report.step % run.log_every == 0:
                self.log.write(report.to_record())
            if report.step % 100 == 0:
                logger.info(
                    f"[{self.name}] step {report.step} L_G={report.l_g:.4f} L_D={report.l_d:.4f}"
                )
            if report.step % run.checkpoint_every == 0:
                self.checkpoint()
        self.checkpoint()
        return self.state


def resume_state(cfg: Config, out_dir: str | Path) -> TrainState | None:
    """Latest checkpoint of a run directory with its optimizers restored, if any."""
    directory = Path(out_dir) / "checkpoints" / LATEST
    if not directory.exists():
        return None
    return load_checkpoint(directory, cfg, lambda bundle: make_optimizers(bundle, cfg))


def train_vc(
    cfg: Config,
    manifest: DatasetManifest,
    out_dir: str | Path | None = None,
    resume: bool = False,
    max_steps: int | None = None,
) -> TrainState:
    """Train the full voice-conversion bundle on the manifest's train split."""
    out_dir = Path(out_dir or cfg.out_dir)
    configure_determinism(cfg)
    snapshot_config(cfg, out_dir)
    if not manifest.split("train"):
        raise DatasetError("the manifest has no training entries")
    dataset = ClipDataset(manifest, cfg, "train", cache_dir=out_dir / "cache")

    state = None
    if resume:
        state = resume_state(cfg, out_dir)
        if state is not None:
            StepLogWriter(out_dir / STEP_LOG).truncate_after(state.step)
            logger.info(f"Resuming from step {state.step}")
    trainer = VCTrainer(cfg, dataset, out_dir, state=state)
    return trainer.fit(max_steps)
