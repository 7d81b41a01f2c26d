import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from saaplus.backends import (
    GridFeatureExtractor,
    OracleFixture,
    OracleGenerator,
    OracleRefiner,
    RemoteFeatureExtractor,
    RemoteGenerator,
    RemoteRefiner,
)
from saaplus.core import BoxCandidate, ImageRecord, decode_rle
from saaplus.errors import FixtureError, TransportError

from conftest import box_rle

H = W = 400


def gray_image(image_id="img"):
    return ImageRecord(image_id, "cat", np.full((H, W, 3), 0.5), (H, W))


def fixture_with(entries):
    return OracleFixture.from_raw({"img": entries})


# --- oracle generator --------------------------------------------------------

def test_generate_fixture_lookup():
    box = (10, 10, 60, 60)
    fx = fixture_with([{"phrase": "black hole", "box": list(box), "score": 0.9, "mask": None}])
    hits = OracleGenerator(fx).generate(gray_image(), ["black hole"], score_floor=0.0)
    assert len(hits) == 1
    assert hits[0].box == box and hits[0].score == 0.9 and hits[0].phrase == "black hole"


def test_generate_substring_matching_both_directions():
    box = (10, 10, 60, 60)
    fx = fixture_with([{"phrase": "black hole", "box": list(box), "score": 0.9, "mask": None}])
    gen = OracleGenerator(fx)
    assert gen.generate(gray_image(), ["a small black hole on the left"], 0.0)  # phrase in prompt
    assert gen.generate(gray_image(), ["hole"], 0.0)  # prompt in phrase
    assert gen.generate(gray_image(), ["BLACK HOLE"], 0.0)  # case-insensitive
    assert gen.generate(gray_image(), ["white bubble"], 0.0) == []


def test_generate_no_match_empty():
    fx = fixture_with([{"phrase": "scratch", "box": [0, 0, 5, 5], "score": 0.5, "mask": None}])
    assert OracleGenerator(fx).generate(gray_image(), ["hole"], 0.0) == []


def test_generate_score_floor_dominates():
    fx = fixture_with([{"phrase": "hole", "box": [0, 0, 5, 5], "score": 0.9, "mask": None}])
    assert OracleGenerator(fx).generate(gray_image(), ["hole"], 0.95) == []


def test_generate_deterministic_order():
    entries = [
        {"phrase": "b hole", "box": [0, 0, 5, 5], "score": 0.5, "mask": None},
        {"phrase": "a hole", "box": [0, 0, 5, 5], "score": 0.5, "mask": None},
        {"phrase": "a hole", "box": [0, 0, 4, 4], "score": 0.5, "mask": None},
        {"phrase": "c hole", "box": [0, 0, 5, 5], "score": 0.9, "mask": None},
    ]
    hits = OracleGenerator(fixture_with(entries)).generate(gray_image(), ["hole"], 0.0)
    assert [(h.score, h.phrase, h.box) for h in hits] == [
        (0.9, "c hole", (0, 0, 5, 5)),
        (0.5, "a hole", (0, 0, 4, 4)),
        (0.5, "a hole", (0, 0, 5, 5)),
        (0.5, "b hole", (0, 0, 5, 5)),
    ]


def test_generate_requires_prompts():
    fx = fixture_with([])
    with pytest.raises(ValueError):
        OracleGenerator(fx).generate(gray_image(), [], 0.0)


def test_generate_phrase_always_from_match_set():
    entries = [
        {"phrase": "deep hole", "box": [0, 0, 5, 5], "score": 0.5, "mask": None},
        {"phrase": "crack", "box": [5, 5, 9, 9], "score": 0.6, "mask": None},
    ]
    hits = OracleGenerator(fixture_with(entries)).generate(gray_image(), ["hole"], 0.0)
    assert {h.phrase for h in hits} <= {"deep hole"}


def test_fixture_phrases_normalized_lowercase():
    fx = fixture_with([{"phrase": "Black HOLE", "box": [0, 0, 5, 5], "score": 0.5, "mask": None}])
    assert fx.entries["img"][0].phrase == "black hole"


def test_fixture_rejects_bad_box_or_score():
    with pytest.raises(FixtureError):
        fixture_with([{"phrase": "x", "box": [5, 0, 5, 5], "score": 0.5, "mask": None}])
    with pytest.raises(FixtureError):
        fixture_with([{"phrase": "x", "box": [0, 0, 5, 5], "score": 1.5, "mask": None}])


def test_fixture_load_missing_file(tmp_path):
    with pytest.raises(FixtureError):
        OracleFixture.load(tmp_path / "nope.json")


def test_fixture_load_bad_json(tmp_path):
    p = tmp_path / "fx.json"
    p.write_text("{not json")
    with pytest.raises(FixtureError):
        OracleFixture.load(p)


# --- oracle refiner -----------------------------------------------------------

def test_refine_uses_fixture_mask():
    box = (10, 10, 20, 20)
    mask_rle = box_rle((50, 50, 70, 70), H, W)  # deliberately different from the box
    fx = fixture_with([{"phrase": "hole", "box": list(box), "score": 0.7, "mask": mask_rle}])
    cand = BoxCandidate(box, 0.7, "hole")
    (out,) = OracleRefiner(fx).refine(gray_image(), [cand])
    assert np.array_equal(out.mask, decode_rle(mask_rle))
    assert out.score == 0.7 and out.phrase == "hole"


def test_refine_rasterizes_when_no_fixture_mask():
    box = (10, 10, 20, 20)
    fx = fixture_with([{"phrase": "hole", "box": list(box), "score": 0.7, "mask": None}])
    (out,) = OracleRefiner(fx).refine(gray_image(), [BoxCandidate(box, 0.7, "hole")])
    assert out.mask.sum() == 100
    assert out.mask[15, 15]


def test_refine_empty_input():
    fx = fixture_with([])
    assert OracleRefiner(fx).refine(gray_image(), []) == []


def test_refine_preserves_count_and_scores():
    boxes = [BoxCandidate((0, 0, 10, 10), 0.5, "a"), BoxCandidate((20, 20, 40, 40), 0.9, "b")]
    fx = fixture_with([])
    out = OracleRefiner(fx).refine(gray_image(), boxes)
    assert len(out) == len(boxes)
    assert sorted(c.score for c in out) == sorted(b.score for b in boxes)


def test_refine_intersects_prompting_box():
    box = (10, 10, 20, 20)
    fx = fixture_with([{"phrase": "hole", "box": list(box), "score": 0.7,
                        "mask": box_rle((12, 12, 30, 30), H, W)}])
    (out,) = OracleRefiner(fx).refine(gray_image(), [BoxCandidate(box, 0.7, "hole")])
    from saaplus.core import rasterize_box
    assert (out.mask & rasterize_box(box, H, W)).any()


# --- mock determinism ----------------------------------------------------------

def test_mock_backends_pure():
    fx = fixture_with([{"phrase": "hole", "box": [0, 0, 50, 50], "score": 0.7, "mask": None}])
    gen = OracleGenerator(fx)
    a = gen.generate(gray_image(), ["hole"], 0.0)
    b = gen.generate(gray_image(), ["hole"], 0.0)
    assert a == b
    feats = GridFeatureExtractor(10)
    fa = feats.extract_features(gray_image())
    fb = feats.extract_features(gray_image())
    assert np.array_equal(fa.vectors, fb.vectors)


# --- grid feature extractor -----------------------------------------------------

def test_features_uniform_image_all_identical():
    grid = GridFeatureExtractor(10).extract_features(gray_image())
    flat = grid.vectors.reshape(-1, 3)
    assert np.allclose(flat, flat[0], atol=1e-12)


def test_features_distinct_patch_differs():
    pixels = np.zeros((H, W, 3))
    pixels[:, :] = (0.1, 0.1, 0.8)  # blue everywhere
    pixels[0:40, 0:40] = (0.9, 0.05, 0.05)  # one red cell at 10x10 grid
    image = ImageRecord("img", "cat", pixels, (H, W))
    grid = GridFeatureExtractor(10).extract_features(image)
    red = grid.vectors[0, 0]
    others = grid.vectors.reshape(-1, 3)[1:]
    assert np.all(np.linalg.norm(others - red, axis=1) > 0.5)
    assert np.allclose(others, others[0], atol=1e-12)


def test_features_unit_norm_on_random_image():
    rng = np.random.default_rng(2)
    image = ImageRecord("img", "cat", rng.uniform(0, 1, size=(H, W, 3)), (H, W))
    grid = GridFeatureExtractor(20).extract_features(image)
    norms = np.linalg.norm(grid.vectors, axis=2)
    assert np.all(np.abs(norms - 1.0) <= 1e-6)


def test_features_black_image_uses_basis_vector():
    image = ImageRecord("img", "cat", np.zeros((H, W, 3)), (H, W))
    grid = GridFeatureExtractor(10).extract_features(image)
    assert np.allclose(grid.vectors[..., 0], 1.0)


# --- remote adapters -------------------------------------------------------------

class _AdapterHandler(BaseHTTPRequestHandler):
    responses: dict = {}
    requests_seen: list = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).requests_seen.append((self.path, body))
        spec = type(self).responses.get(self.path)
        if spec is None:
            self.send_error(500)
            return
        status, payload = spec
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def adapter_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _AdapterHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _AdapterHandler.responses = {}
    _AdapterHandler.requests_seen = []
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_remote_generate_parses_detections(adapter_server):
    _AdapterHandler.responses["/v1/generate"] = (
        200,
        {"detections": [{"box": [1, 2, 30, 40], "score": 0.75, "phrase": "Hole"}]},
    )
    gen = RemoteGenerator(adapter_server + "/v1/generate", retries=0)
    hits = gen.generate(gray_image(), ["hole"], score_floor=0.5)
    assert hits == [BoxCandidate((1, 2, 30, 40), 0.75, "hole")]
    path, body = _AdapterHandler.requests_seen[0]
    assert path == "/v1/generate"
    assert body["prompts"] == ["hole"]
    assert body["box_threshold"] == 0.5
    assert "text_threshold" in body and "image" in body


def test_remote_generate_http_error_is_transport_error(adapter_server):
    _AdapterHandler.responses["/v1/generate"] = (503, {"error": "down"})
    gen = RemoteGenerator(adapter_server + "/v1/generate", retries=1)
    with pytest.raises(TransportError):
        gen.generate(gray_image(), ["hole"], 0.0)
    assert len(_AdapterHandler.requests_seen) == 2  # retried once


def test_remote_generate_unreachable_endpoint():
    gen = RemoteGenerator("http://127.0.0.1:1/v1/generate", retries=0, timeout=0.5)
    with pytest.raises(TransportError):
        gen.generate(gray_image(), ["hole"], 0.0)


def test_remote_generate_malformed_payload(adapter_server):
    _AdapterHandler.responses["/v1/generate"] = (200, {"detections": [{"box": "oops"}]})
    gen = RemoteGenerator(adapter_server + "/v1/generate", retries=0)
    with pytest.raises(TransportError):
        gen.generate(gray_image(), ["hole"], 0.0)


def test_remote_refine_masks(adapter_server):
    rle = box_rle((0, 0, 10, 10), H, W)
    _AdapterHandler.responses["/v1/refine"] = (200, {"masks": [rle]})
    ref = RemoteRefiner(adapter_server + "/v1/refine", retries=0)
    (out,) = ref.refine(gray_image(), [BoxCandidate((0, 0, 10, 10), 0.7, "hole")])
    assert out.mask.sum() == 100


def test_remote_refine_count_mismatch(adapter_server):
    _AdapterHandler.responses["/v1/refine"] = (200, {"masks": []})
    ref = RemoteRefiner(adapter_server + "/v1/refine", retries=0)
    with pytest.raises(TransportError):
        ref.refine(gray_image(), [BoxCandidate((0, 0, 10, 10), 0.7, "hole")])


def test_remote_features_roundtrip(adapter_server):
    import base64

    rng = np.random.default_rng(0)
    vectors = rng.normal(size=(4, 4, 8)).astype("<f4")
    _AdapterHandler.responses["/v1/features"] = (
        200,
        {"shape": [4, 4, 8], "data": base64.b64encode(vectors.tobytes()).decode()},
    )
    feats = RemoteFeatureExtractor(adapter_server + "/v1/features", retries=0)
    grid = feats.extract_features(gray_image())
    assert grid.shape == (4, 4, 8)
    norms = np.linalg.norm(grid.vectors, axis=2)
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_remote_client_serializes_in_flight_requests():
    """At most one outstanding request per adapter unless it declares
    parallelism."""
    active = []
    peak = []
    lock = threading.Lock()

    class SlowHandler(BaseHTTPRequestHandler):
        def do_POST(self):
            with lock:
                active.append(1)
                peak.append(len(active))
            time.sleep(0.05)
            with lock:
                active.pop()
            length = int(self.headers["Content-Length"])
            self.rfile.read(length)
            data = json.dumps({"detections": []}).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), SlowHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        gen = RemoteGenerator(f"http://127.0.0.1:{server.server_address[1]}/v1/generate", retries=0)
        image = gray_image()
        workers = [
            threading.Thread(target=lambda: gen.generate(image, ["hole"], 0.0)) for _ in range(5)
        ]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
        assert max(peak) == 1
    finally:
        server.shutdown()


def test_remote_features_size_mismatch(adapter_server):
    import base64

    _AdapterHandler.responses["/v1/features"] = (
        200,
        {"shape": [4, 4, 8], "data": base64.b64encode(b"\x00" * 16).decode()},
    )
    feats = RemoteFeatureExtractor(adapter_server + "/v1/features", retries=0)
    with pytest.raises(TransportError):
        feats.extract_features(gray_image())
