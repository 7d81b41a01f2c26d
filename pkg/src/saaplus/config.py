"""Backend wiring: config file, environment overrides, defaults.

Precedence per endpoint: explicit flags beat the SAA_BACKEND_*_URL
environment variables, which beat the config file, which beats the default
(oracle fixtures next to the manifest, grid mock features).

Config file schema (JSON):

    {
      "generate": {"kind": "oracle", "fixtures": "<path>"}
                 | {"kind": "remote", "url": "...", "retries": 2, "timeout": 60},
      "refine":   {...},
      "features": {"kind": "grid", "grid": 20} | {"kind": "remote", ...}
    }
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Mapping

from .backends import (
    BackendSet,
    GridFeatureExtractor,
    OracleFixture,
    OracleGenerator,
    OracleRefiner,
    RemoteFeatureExtractor,
    RemoteGenerator,
    RemoteRefiner,
)
from .errors import ConfigError

ENV_GENERATE_URL = "SAA_BACKEND_GENERATE_URL"
ENV_REFINE_URL = "SAA_BACKEND_REFINE_URL"
ENV_FEATURES_URL = "SAA_BACKEND_FEATURES_URL"

DEFAULT_FIXTURES_NAME = "fixtures.json"
DEFAULT_GRID = 20


def _load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"backend config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"backend config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"backend config {path} must be a JSON object")
    return data


def build_backends(
    manifest_dir: str | Path,
    config_path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    flag_urls: Mapping[str, str] | None = None,
    retries: int | None = None,
) -> BackendSet:
    """Assemble the three backends for a run rooted at `manifest_dir`."""
    manifest_dir = Path(manifest_dir)
    env = os.environ if env is None else env
    flag_urls = flag_urls or {}
    config = _load_config_file(config_path)

    def endpoint(section: str, env_key: str) -> dict:
        spec = dict(config.get(section, {}))
        url = env.get(env_key)
        if url:
            spec = {"kind": "remote", "url": url, **{k: v for k, v in spec.items() if k in ("retries", "timeout")}}
        if section in flag_urls:
            spec = {"kind": "remote", "url": flag_urls[section]}
        if retries is not None and spec.get("kind") == "remote":
            spec["retries"] = retries
        return spec

    fixture_cache: dict[Path, OracleFixture] = {}

    def oracle_fixture(spec: dict) -> OracleFixture:
        raw = spec.get("fixtures")
        if raw is None:
            fixtures_path = manifest_dir / DEFAULT_FIXTURES_NAME
        else:
            fixtures_path = Path(raw)
            if not fixtures_path.is_absolute():
                fixtures_path = manifest_dir / fixtures_path
        if fixtures_path not in fixture_cache:
            fixture_cache[fixtures_path] = OracleFixture.load(fixtures_path)
        return fixture_cache[fixtures_path]

    def remote_kwargs(spec: dict) -> dict:
        kwargs = {}
        if "retries" in spec:
            kwargs["retries"] = int(spec["retries"])
        if "timeout" in spec:
            kwargs["timeout"] = float(spec["timeout"])
        return kwargs

    gen_spec = endpoint("generate", ENV_GENERATE_URL)
    kind = gen_spec.get("kind", "oracle")
    if kind == "remote":
        if "url" not in gen_spec:
            raise ConfigError("remote generate backend needs a 'url'")
        generator = RemoteGenerator(gen_spec["url"], **remote_kwargs(gen_spec))
    elif kind == "oracle":
        generator = OracleGenerator(oracle_fixture(gen_spec))
    else:
        raise ConfigError(f"unknown generate backend kind {kind!r}")

    ref_spec = endpoint("refine", ENV_REFINE_URL)
    kind = ref_spec.get("kind", "oracle")
    if kind == "remote":
        if "url" not in ref_spec:
            raise ConfigError("remote refine backend needs a 'url'")
        refiner = RemoteRefiner(ref_spec["url"], **remote_kwargs(ref_spec))
    elif kind == "oracle":
        refiner = OracleRefiner(oracle_fixture(ref_spec))
    else:
        raise ConfigError(f"unknown refine backend kind {kind!r}")

    feat_spec = endpoint("features", ENV_FEATURES_URL)
    kind = feat_spec.get("kind", "grid")
    if kind == "remote":
        if "url" not in feat_spec:
            raise ConfigError("remote features backend needs a 'url'")
        features = RemoteFeatureExtractor(feat_spec["url"], **remote_kwargs(feat_spec))
    elif kind in ("grid", "oracle"):
        features = GridFeatureExtractor(int(feat_spec.get("grid", DEFAULT_GRID)))
    else:
        raise ConfigError(f"unknown features backend kind {kind!r}")

    return BackendSet(generator=generator, refiner=refiner, features=features)
