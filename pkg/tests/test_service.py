import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from linedensity.service import create_app, downsample_to_fit


@pytest.fixture
def dirs(tmp_path):
    image_dir = tmp_path / "images"
    annotation_dir = tmp_path / "annotations"
    image_dir.mkdir()
    annotation_dir.mkdir()
    rng = np.random.default_rng(70)
    for name in ("cam_001", "cam_002"):
        frame = rng.integers(0, 255, size=(48, 64, 3), dtype=np.uint8)
        Image.fromarray(frame).save(image_dir / f"{name}.png")
    return image_dir, annotation_dir


@pytest.fixture
def client(dirs):
    return TestClient(create_app(*dirs))


FIG3_DOC = {
    "image": "cam_001",
    "width": 30,
    "height": 30,
    "labels": [{"x1": 5, "y1": 5, "x2": 25, "y2": 25}],
}


class TestImages:
    def test_list(self, client):
        response = client.get("/api/images")
        assert response.status_code == 200
        assert response.json() == ["cam_001", "cam_002"]

    def test_get_bytes(self, client):
        response = client.get("/api/images/cam_001")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert response.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_404(self, client):
        assert client.get("/api/images/nope").status_code == 404

    def test_traversal_rejected(self, client):
        assert client.get("/api/images/..%2F..%2Fetc").status_code in (400, 404)
        assert client.get("/api/annotations/.hidden").status_code == 400


class TestAnnotations:
    def test_round_trip(self, client):
        put = client.put("/api/annotations/cam_001", content=json.dumps(FIG3_DOC))
        assert put.status_code == 200, put.text
        assert put.json() == {"saved": "cam_001", "labels": 1}
        got = client.get("/api/annotations/cam_001")
        assert got.status_code == 200
        assert got.json() == FIG3_DOC

    def test_get_missing_404(self, client):
        assert client.get("/api/annotations/cam_002").status_code == 404

    def test_invalid_json_400_with_diagnostics(self, client):
        response = client.put("/api/annotations/cam_001", content="{nope")
        assert response.status_code == 400
        assert "invalid JSON" in response.json()["detail"]

    def test_schema_violation_400(self, client):
        doc = dict(FIG3_DOC, labels=[{"x1": 1}])
        response = client.put("/api/annotations/cam_001", content=json.dumps(doc))
        assert response.status_code == 400
        assert "label 0" in response.json()["detail"]

    def test_id_mismatch_400(self, client):
        response = client.put("/api/annotations/cam_002", content=json.dumps(FIG3_DOC))
        assert response.status_code == 400
        assert "does not match" in response.json()["detail"]

    def test_write_is_atomic_no_temp_left(self, client, dirs):
        _, annotation_dir = dirs
        client.put("/api/annotations/cam_001", content=json.dumps(FIG3_DOC))
        leftovers = [p for p in annotation_dir.iterdir() if p.suffix == ".tmp"]
        assert leftovers == []
        assert (annotation_dir / "cam_001.json").exists()

    def test_last_write_wins(self, client):
        first = dict(FIG3_DOC, labels=[])
        client.put("/api/annotations/cam_001", content=json.dumps(first))
        client.put("/api/annotations/cam_001", content=json.dumps(FIG3_DOC))
        assert client.get("/api/annotations/cam_001").json() == FIG3_DOC


class TestPreview:
    def _preview(self, client, **overrides):
        body = {
            "width": 30,
            "height": 30,
            "labels": [{"x1": 5, "y1": 5, "x2": 25, "y2": 25}],
            "scheme": "agk",
            "config": {"sigma_basic": 3.0},
        }
        body.update(overrides)
        return client.post("/api/preview", json=body)

    def test_count_sums_to_one(self, client):
        response = self._preview(client)
        assert response.status_code == 200
        payload = response.json()
        assert payload["count"] == pytest.approx(1.0, abs=1e-6)

    def test_heatmap_decodes(self, client):
        payload = self._preview(client).json()
        gray = base64.b64decode(payload["heatmap"])
        assert len(gray) == payload["width"] * payload["height"]
        assert payload["width"] == 30
        assert max(gray) == 255  # scaled by the maximum

    def test_empty_labels(self, client):
        payload = self._preview(client, labels=[]).json()
        assert payload["count"] == 0.0
        assert max(base64.b64decode(payload["heatmap"])) == 0

    def test_count_conserved_across_schemes(self, client):
        counts = {
            scheme: self._preview(client, scheme=scheme).json()["count"]
            for scheme in ("dot", "line", "agk")
        }
        for count in counts.values():
            assert count == pytest.approx(1.0, abs=1e-6)

    def test_bad_scheme_400(self, client):
        assert self._preview(client, scheme="wavelet").status_code == 400

    def test_bad_dimensions_422(self, client):
        assert self._preview(client, width=0).status_code == 422

    def test_large_canvas_downsampled(self, client):
        response = self._preview(
            client, width=1200, height=600,
            labels=[{"x1": 100, "y1": 100, "x2": 300, "y2": 200}],
            config={"sigma_basic": 15.0},
        )
        payload = response.json()
        assert payload["count"] == pytest.approx(1.0, abs=1e-6)
        assert max(payload["width"], payload["height"]) <= 256
        # aspect preserved through integer-factor pooling
        assert payload["width"] == 240 and payload["height"] == 120


class TestDownsample:
    def test_small_grid_untouched(self):
        grid = np.ones((10, 20))
        assert downsample_to_fit(grid, max_dim=256) is grid

    def test_mass_preserving_mean(self):
        grid = np.ones((512, 512))
        small = downsample_to_fit(grid, max_dim=256)
        assert small.shape == (256, 256)
        assert small.mean() == pytest.approx(1.0)


class TestStartupValidation:
    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            create_app(tmp_path / "nope", tmp_path)


class TestStaticUi:
    def test_ui_dir_served_at_root(self, dirs, tmp_path):
        ui_dir = tmp_path / "ui"
        ui_dir.mkdir()
        (ui_dir / "index.html").write_text("<!doctype html><title>annotator</title>")
        client = TestClient(create_app(*dirs, ui_dir=ui_dir))
        response = client.get("/")
        assert response.status_code == 200
        assert "annotator" in response.text
        # API still reachable alongside the static mount
        assert client.get("/api/images").status_code == 200
