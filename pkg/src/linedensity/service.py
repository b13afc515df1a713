"""HTTP API backing the annotation UI.

The service exposes image listings, annotation storage with atomic
writes, and a density-map preview endpoint so the UI never re-implements
kernel math. All state lives on the file system; concurrent readers are
fine and annotation writes go through write-temp-then-rename.
"""

from __future__ import annotations

import base64
import json
import math
import os
import re
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from .annotations import AnnotationError, annotation_from_dict
from .density import SCHEMES, density_map
from .kernels import KernelConfig
from .pipeline import IMAGE_EXTENSIONS, _find_image

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

# previews are capped to this many pixels on the long side
PREVIEW_MAX_DIM = 256

_MEDIA_TYPES = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".bmp": "image/bmp",
}


class PreviewLabel(BaseModel):
    x1: float
    y1: float
    x2: float
    y2: float


class PreviewConfig(BaseModel):
    sigma_basic: float = 15.0
    expand_factor: float = 0.2
    aspect_ratio: float = 4.0
    fwhm_const: float = 2.355
    alpha: float = 4.0
    trunc_mult: float = 3.0

    def to_kernel_config(self) -> KernelConfig:
        return KernelConfig(
            sigma_basic=self.sigma_basic,
            expand_factor=self.expand_factor,
            aspect_ratio=self.aspect_ratio,
            fwhm_const=self.fwhm_const,
            alpha=self.alpha,
            trunc_mult=self.trunc_mult,
        )


class PreviewRequest(BaseModel):
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    labels: list[PreviewLabel] = Field(default_factory=list)
    scheme: str = "agk"
    config: PreviewConfig = Field(default_factory=PreviewConfig)


def _check_id(image_id: str) -> str:
    if not _ID_RE.match(image_id):
        raise HTTPException(status_code=400, detail=f"invalid id {image_id!r}")
    return image_id


def downsample_to_fit(values: np.ndarray, max_dim: int = PREVIEW_MAX_DIM) -> np.ndarray:
    """Mean-pool a grid by an integer factor so max(h, w) <= max_dim."""
    h, w = values.shape
    k = math.ceil(max(h, w) / max_dim)
    if k <= 1:
        return values
    ph, pw = math.ceil(h / k) * k, math.ceil(w / k) * k
    padded = np.zeros((ph, pw), dtype=values.dtype)
    padded[:h, :w] = values
    return padded.reshape(ph // k, k, pw // k, k).mean(axis=(1, 3))


def heatmap_payload(values: np.ndarray) -> dict:
    """8-bit grayscale heatmap, scaled by the maximum, base64 row-major."""
    small = downsample_to_fit(values)
    peak = float(small.max())
    if peak > 0.0:
        gray = np.round(small / peak * 255.0).astype(np.uint8)
    else:
        gray = np.zeros(small.shape, dtype=np.uint8)
    return {
        "heatmap": base64.b64encode(gray.tobytes()).decode("ascii"),
        "width": int(gray.shape[1]),
        "height": int(gray.shape[0]),
    }


def atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def create_app(image_dir: Path, annotation_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    """Build the service; directories must already exist."""
    image_dir = Path(image_dir)
    annotation_dir = Path(annotation_dir)
    for d in (image_dir, annotation_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"directory does not exist: {d}")

    app = FastAPI(title="linedensity annotation service")

    @app.get("/api/images")
    def list_images() -> list[str]:
        return sorted(
            p.stem for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS
        )

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str) -> FileResponse:
        _check_id(image_id)
        path = _find_image(image_dir, image_id)
        if path is None:
            raise HTTPException(status_code=404, detail=f"no image {image_id!r}")
        return FileResponse(path, media_type=_MEDIA_TYPES[path.suffix.lower()])

    @app.get("/api/annotations/{image_id}")
    def get_annotation(image_id: str) -> dict:
        _check_id(image_id)
        path = annotation_dir / f"{image_id}.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no annotations for {image_id!r}")
        return json.loads(path.read_text())

    @app.put("/api/annotations/{image_id}")
    async def put_annotation(image_id: str, request: Request) -> dict:
        _check_id(image_id)
        body = await request.body()
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"invalid JSON: {exc}") from exc
        try:
            ann = annotation_from_dict(doc)
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if ann.image_id != image_id:
            raise HTTPException(
                status_code=400,
                detail=f"document image id {ann.image_id!r} does not match URL {image_id!r}",
            )
        # stored verbatim: load-time clamping must not change what a GET returns
        atomic_write_text(
            annotation_dir / f"{image_id}.json", json.dumps(doc, indent=2) + "\n"
        )
        return {"saved": image_id, "labels": len(ann.labels)}

    @app.post("/api/preview")
    def preview(req: PreviewRequest) -> dict:
        if req.scheme not in SCHEMES:
            raise HTTPException(
                status_code=400, detail=f"scheme must be one of {list(SCHEMES)}"
            )
        try:
            ann = annotation_from_dict(
                {
                    "image": "preview",
                    "width": req.width,
                    "height": req.height,
                    "labels": [label.model_dump() for label in req.labels],
                }
            )
            config = req.config.to_kernel_config()
        except (AnnotationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        dmap = density_map(ann, config, req.scheme)
        payload = {"count": float(dmap.values.sum())}
        payload.update(heatmap_payload(dmap.values))
        return payload

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
