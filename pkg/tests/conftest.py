import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from duotoon.network import build_model, save_checkpoint  # noqa: E402


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """Seeded desk checkpoints for two styles; 'inku' has both color modes."""
    d = tmp_path_factory.mktemp("models")
    save_checkpoint(d / "inku.preserve.npz", build_model("desk", seed=42), version="inku-preserve-0")
    save_checkpoint(d / "inku.target.npz", build_model("desk", seed=43), version="inku-target-0")
    save_checkpoint(d / "mono.preserve.npz", build_model("desk", seed=44), version="mono-preserve-0")
    return d
