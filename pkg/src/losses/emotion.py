"""Direct emotion supervision through the emotion classifier (semi-supervised)."""

from __future__ import annotations

import torch
import torch.nn.functional as F

UNLABELLED = -1


def emotion_cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> tuple[torch.Tensor, bool]:
    """Mean cross-entropy over labelled members (label ``-1`` means unlabelled).

    Returns ``(loss, has_labels)``. Without any labelled member the loss is an
    exact zero that stays attached to the graph.
    """
    labels = labels.to(device=logits.device, dtype=torch.long)
    labelled = labels != UNLABELLED
    if not bool(labelled.any()):
        return logits.sum() * 0.0, False
    log_probs = F.log_softmax(logits, dim=-1)
    return F.nll_loss(log_probs[labelled], labels[labelled]), True


def loss_emod(
    logits_on_source: torch.Tensor, source_labels: torch.Tensor
) -> tuple[torch.Tensor, bool]:
    """Classifier-side term: recognise the source emotion on real samples."""
    return emotion_cross_entropy(logits_on_source, source_labels)


def loss_emog(
    logits_on_converted: torch.Tensor, source_labels: torch.Tensor
) -> tuple[torch.Tensor, bool]:
    """Generator-side term: the conversion must keep the source emotion."""
    return emotion_cross_entropy(logits_on_converted, source_labels)
