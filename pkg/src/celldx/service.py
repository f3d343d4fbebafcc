"""HTTP inference service: upload a cell image, get a diagnosis or a 3D model.

Weights load once at startup and are treated as immutable, so request
handling needs no locks: every inference runs against the same read-only
stores and identical requests produce identical bytes.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from . import model as model_mod
from .data.dataset import decode_image_bytes
from .errors import CelldxError, DataError
from .pointcloud import generator as gen_mod
from .pointcloud.pcd import pcd_to_obj, write_pcd
from .training import prunable_names

log = logging.getLogger(__name__)

DEFAULT_MAX_UPLOAD = 5 * 1024 * 1024


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    classifier_spec: str | None = None
    classifier_weights: str | None = None
    generator_spec: str | None = None
    generator_weights: str | None = None
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD
    model_version: str | None = None
    cors_origins: list[str] = field(default_factory=lambda: ["*"])
    static_dir: str | None = None  # built web UI to serve at /, optional

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        cfg = cls(**data)
        base = os.path.dirname(os.path.abspath(path))
        for attr in ("classifier_spec", "classifier_weights", "generator_spec",
                     "generator_weights", "static_dir"):
            value = getattr(cfg, attr)
            if value and not os.path.isabs(value):
                setattr(cfg, attr, os.path.join(base, value))
        return cfg


class ModelRegistry:
    """Loaded models; populated once before the app serves traffic."""

    def __init__(self):
        self.classifier_spec: model_mod.ModelSpec | None = None
        self.classifier_weights: model_mod.WeightStore | None = None
        self.classifier_sparsity: float = 0.0
        self.generator: gen_mod.GeneratorSpec | None = None
        self.generator_weights: model_mod.WeightStore | None = None
        self.version: str = "unloaded"

    def load_classifier(self, spec_path, weights_path, version: str | None):
        spec = model_mod.load_spec(spec_path)
        weights = model_mod.load_weights(weights_path)
        spec.validate()
        model_mod.check_weights_match(spec, weights)
        if version:
            spec.version = version
        names = prunable_names(weights)
        total = sum(weights[n].size for n in names)
        zeros = sum(int((weights[n] == 0).sum()) for n in names)
        self.classifier_sparsity = zeros / total if total else 0.0
        self.classifier_spec = spec
        self.classifier_weights = weights
        self.version = spec.version
        log.info("classifier %s loaded (sparsity %.3f)", spec.version, self.classifier_sparsity)

    def load_generator(self, spec_path, weights_path):
        gen = gen_mod.load_generator_spec(spec_path)
        weights = model_mod.load_weights(weights_path)
        gen.validate()
        self.generator = gen
        self.generator_weights = weights
        log.info("generator %s loaded", gen.version)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "error": message})


async def _read_upload(request: Request, limit: int) -> bytes | JSONResponse:
    declared = request.headers.get("content-length")
    if declared and declared.isdigit() and int(declared) > limit:
        return _error(413, "too_large", f"upload exceeds {limit} bytes")
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        for value in form.values():
            if hasattr(value, "read"):
                body = await value.read()
                break
        else:
            return _error(400, "bad_image", "multipart form carries no file field")
    else:
        body = await request.body()
    if len(body) > limit:
        return _error(413, "too_large", f"upload exceeds {limit} bytes")
    if not body:
        return _error(400, "bad_image", "empty request body")
    return body


def create_app(config: ServiceConfig | None = None, registry: ModelRegistry | None = None) -> FastAPI:
    """Build the ASGI app; loads any configured models eagerly.

    A pre-populated registry can be injected for tests; passing neither
    argument yields an app that answers 503 everywhere.
    """
    config = config or ServiceConfig()
    if registry is None:
        registry = ModelRegistry()
        if config.classifier_spec and config.classifier_weights:
            registry.load_classifier(
                config.classifier_spec, config.classifier_weights, config.model_version
            )
        if config.generator_spec and config.generator_weights:
            registry.load_generator(config.generator_spec, config.generator_weights)

    app = FastAPI(title="celldx", docs_url=None, redoc_url=None)
    app.state.registry = registry
    app.state.config = config
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/healthz")
    def healthz():
        if registry.classifier_spec is None:
            return _error(503, "model_not_loaded", "classifier not loaded")
        return PlainTextResponse("ok")

    @app.get("/api/model")
    def model_info():
        spec = registry.classifier_spec
        if spec is None:
            return _error(503, "model_not_loaded", "classifier not loaded")
        return JSONResponse({
            "classes": list(spec.class_labels),
            "input_size": list(spec.input_shape),
            "model_version": spec.version,
            "sparsity": registry.classifier_sparsity,
        })

    @app.post("/api/diagnose")
    async def diagnose(request: Request):
        spec = registry.classifier_spec
        if spec is None:
            return _error(503, "model_not_loaded", "classifier not loaded")
        body = await _read_upload(request, config.max_upload_bytes)
        if isinstance(body, JSONResponse):
            return body
        try:
            image = decode_image_bytes(body, spec.input_shape[1])
        except DataError as exc:
            return _error(400, "bad_image", str(exc))
        diagnosis = model_mod.predict(spec, registry.classifier_weights, image)
        return JSONResponse(diagnosis.to_dict())

    @app.post("/api/reconstruct")
    async def reconstruct(request: Request, format: str = "obj"):
        gen = registry.generator
        if gen is None:
            return _error(503, "model_not_loaded", "generator not loaded")
        if format not in ("obj", "pcd"):
            return _error(400, "bad_format", f"format must be obj or pcd, got {format!r}")
        body = await _read_upload(request, config.max_upload_bytes)
        if isinstance(body, JSONResponse):
            return body
        try:
            image = decode_image_bytes(body, gen.image_size)
        except DataError as exc:
            return _error(400, "bad_image", str(exc))
        try:
            cloud = gen_mod.generate(gen, registry.generator_weights, image)
            payload = write_pcd(cloud) if format == "pcd" else pcd_to_obj(cloud)
        except CelldxError as exc:
            return _error(500, "reconstruction_failed", str(exc))
        return Response(content=payload, media_type="text/plain")

    if config.static_dir and os.path.isdir(config.static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="webui")

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
