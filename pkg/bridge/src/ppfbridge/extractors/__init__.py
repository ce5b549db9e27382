from __future__ import annotations

from pathlib import Path

from .base import DEFAULT_SCALES, EXTRACTOR_NAMES, Extractor, ExtractorConfig
from .orb import OrbExtractor

__all__ = [
    "DEFAULT_SCALES",
    "EXTRACTOR_NAMES",
    "Extractor",
    "ExtractorConfig",
    "OrbExtractor",
    "make_extractor",
]


def make_extractor(cfg: ExtractorConfig) -> Extractor:
    """Instantiate the configured backend (loading weights if needed)."""
    if cfg.extractor_name == "orb":
        return OrbExtractor(max_features=cfg.max_features)
    from ..weights import default_weights_dir
    from .torchscript import TorchScriptExtractor

    weights_dir = Path(cfg.weights_dir) if cfg.weights_dir else default_weights_dir()
    return TorchScriptExtractor(
        cfg.extractor_name,
        weights_dir / f"{cfg.extractor_name}.pt",
        color_mode=cfg.input_color_mode,
        device=cfg.device,
    )
