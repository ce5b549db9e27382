from __future__ import annotations

import json

import pytest

from ppfbridge import WeightsError, fetch_weights
from ppfbridge.weights import sha256_of


@pytest.fixture
def artifact(tmp_path):
    """A fake weight file served over file:// plus its registry."""
    blob = tmp_path / "served" / "toy.pt"
    blob.parent.mkdir()
    blob.write_bytes(b"torchscript bytes " * 100)
    registry = tmp_path / "registry.json"
    registry.write_text(json.dumps({
        "superpoint": {"url": blob.as_uri(), "sha256": sha256_of(blob)}
    }))
    return blob, registry


class TestFetchWeights:
    def test_verified_fetch(self, artifact, tmp_path):
        blob, registry = artifact
        dest = fetch_weights("superpoint", weights_dir=tmp_path / "w",
                             registry_path=registry)
        assert dest.read_bytes() == blob.read_bytes()
        lock = json.loads((tmp_path / "w" / "weights.lock.json").read_text())
        assert lock["superpoint"]["sha256"] == sha256_of(blob)

    def test_checksum_mismatch_rejected(self, artifact, tmp_path):
        blob, registry = artifact
        doc = json.loads(registry.read_text())
        doc["superpoint"]["sha256"] = "0" * 64
        registry.write_text(json.dumps(doc))
        with pytest.raises(WeightsError, match="mismatch"):
            fetch_weights("superpoint", weights_dir=tmp_path / "w",
                          registry_path=registry)
        assert not (tmp_path / "w" / "superpoint.pt").exists()

    def test_unpinned_refused_by_default(self, artifact, tmp_path):
        blob, registry = artifact
        doc = json.loads(registry.read_text())
        doc["superpoint"]["sha256"] = None
        registry.write_text(json.dumps(doc))
        with pytest.raises(WeightsError, match="pinned"):
            fetch_weights("superpoint", weights_dir=tmp_path / "w",
                          registry_path=registry)

    def test_allow_unpinned_records_digest(self, artifact, tmp_path):
        blob, registry = artifact
        doc = json.loads(registry.read_text())
        doc["superpoint"]["sha256"] = None
        registry.write_text(json.dumps(doc))
        fetch_weights("superpoint", weights_dir=tmp_path / "w",
                      registry_path=registry, allow_unpinned=True)
        lock = json.loads((tmp_path / "w" / "weights.lock.json").read_text())
        assert lock["superpoint"]["sha256"] == sha256_of(blob)

    def test_orb_needs_no_weights(self):
        with pytest.raises(WeightsError, match="weight-free"):
            fetch_weights("orb")

    def test_unregistered_extractor(self, tmp_path):
        with pytest.raises(WeightsError, match="no artifact registered"):
            fetch_weights("d2net", weights_dir=tmp_path)
