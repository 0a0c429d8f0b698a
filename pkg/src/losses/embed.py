import torch


def loss_embed(source_embedding: torch.Tensor, converted_embedding: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference over the embedding coordinates (and the batch)."""
    return (converted_embedding - source_embedding).abs().mean()
