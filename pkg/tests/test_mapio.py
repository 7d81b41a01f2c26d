import io

import numpy as np
import pytest
from PIL import Image

from saaplus.mapio import (
    MAP_MAGIC,
    SALIENCY_MAGIC,
    canonical_json,
    decode_map,
    encode_map,
    map_to_png16,
    read_map,
    write_map,
)


def test_map_binary_roundtrip(tmp_path):
    values = np.random.default_rng(0).uniform(0, 3, size=(13, 17))
    path = tmp_path / "m.bin"
    write_map(path, values)
    back = read_map(path)
    assert back.shape == (13, 17)
    assert np.allclose(back, values, atol=1e-6)  # float32 storage


def test_map_header_format():
    values = np.zeros((2, 3))
    data = encode_map(values)
    assert data.startswith(b"SAA+MAP1 2 3\n")
    assert len(data) == len(b"SAA+MAP1 2 3\n") + 2 * 3 * 4


def test_saliency_header():
    data = encode_map(np.zeros((2, 2)), SALIENCY_MAGIC)
    assert data.startswith(b"SAA+SAL1 2 2\n")
    assert np.array_equal(decode_map(data, SALIENCY_MAGIC), np.zeros((2, 2)))


def test_decode_rejects_wrong_magic():
    data = encode_map(np.zeros((2, 2)), MAP_MAGIC)
    with pytest.raises(ValueError):
        decode_map(data, SALIENCY_MAGIC)


def test_decode_rejects_truncated_payload():
    data = encode_map(np.zeros((4, 4)))[:-3]
    with pytest.raises(ValueError):
        decode_map(data)


def test_png16_is_16bit_grayscale_scaled():
    values = np.array([[0.0, 1.0], [2.0, 4.0]])
    png = map_to_png16(values, scale_max=4.0)
    img = Image.open(io.BytesIO(png))
    assert img.mode.startswith("I")
    arr = np.asarray(img)
    assert arr.dtype in (np.int32, np.uint16)
    assert arr[0, 0] == 0
    assert arr[1, 1] == 65535
    assert arr[0, 1] == round(65535 / 4)


def test_png16_zero_scale_black_image():
    png = map_to_png16(np.zeros((3, 3)), scale_max=0.0)
    arr = np.asarray(Image.open(io.BytesIO(png)))
    assert not arr.any()


def test_canonical_json_deterministic():
    payload = {"b": 2, "a": [1.5, {"z": 0.1, "y": None}]}
    assert canonical_json(payload) == canonical_json(dict(reversed(payload.items())))
    assert canonical_json(payload).endswith("\n")
