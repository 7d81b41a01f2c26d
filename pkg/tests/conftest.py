from pathlib import Path

import numpy as np
import pytest

from saaplus.backends import BackendSet, GridFeatureExtractor, OracleFixture, OracleGenerator, OracleRefiner
from saaplus.datasets import load_manifest
from saaplus.datasets.desk import build_desk_dataset, desk_backends, desk_profile


@pytest.fixture(scope="session")
def desk_root(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("desk")
    build_desk_dataset(root, verify=False)
    return root


@pytest.fixture(scope="session")
def desk_manifest(desk_root):
    return load_manifest(desk_root / "manifest.json")


@pytest.fixture(scope="session")
def desk_backend_set(desk_root) -> BackendSet:
    return desk_backends(desk_root)


@pytest.fixture(scope="session")
def desk_profile_default():
    return desk_profile()


def make_backends(fixture_raw: dict, grid: int = 20) -> BackendSet:
    fixture = OracleFixture.from_raw(fixture_raw)
    return BackendSet(
        generator=OracleGenerator(fixture),
        refiner=OracleRefiner(fixture),
        features=GridFeatureExtractor(grid),
    )


def box_rle(box, height, width) -> str:
    from saaplus.core import encode_rle

    mask = np.zeros((height, width), dtype=bool)
    x0, y0, x1, y1 = box
    mask[y0:y1, x0:x1] = True
    return encode_rle(mask)
