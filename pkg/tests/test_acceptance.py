"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line. The desk benchmark criteria run the
real CLI against the generated fixture dataset with oracle backends only:
no network, no GPU.
"""

import base64
import filecmp
import json
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from saaplus.cli import main
from saaplus.core import RegionCandidate, StageTag, validate_anomaly_map
from saaplus.datasets import evaluate_dataset, max_f1_pixel, run_ablations
from saaplus.datasets.metrics import f1_at_threshold
from saaplus.pipeline import fuse_with_shape, property_filter
from saaplus.saliency import FeatureGrid, saliency_map


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def unit(vectors):
    return vectors / np.linalg.norm(vectors, axis=2, keepdims=True)


def brute_force_saliency(vectors, n_neighbors):
    gh, gw, _ = vectors.shape
    flat = [vectors[i, j] for i in range(gh) for j in range(gw)]
    cells = len(flat)
    n_eff = min(n_neighbors, cells - 1)
    out = np.zeros(cells)
    for i in range(cells):
        sims = sorted(
            ((float(np.dot(flat[i], flat[j])), j) for j in range(cells) if j != i),
            key=lambda t: (-t[0], t[1]),
        )
        out[i] = sum(1.0 - s for s, _ in sims[:n_eff]) / n_eff
    return out.reshape(gh, gw)


def test_saliency_oracle_equivalence():
    with criterion("saliency-oracle-equivalence"):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(200):
            gh = int(rng.integers(1, 9))
            gw = int(rng.integers(1, 9))
            if gh * gw < 2:
                gw = 2
            d = int(rng.integers(2, 17))
            grid = FeatureGrid(unit(rng.normal(size=(gh, gw, d))))
            n = int(rng.choice([1, 3, 400]))
            fast = saliency_map(grid, n).values
            slow = brute_force_saliency(grid.vectors, n)
            worst = max(worst, float(np.max(np.abs(fast - slow))))
        elapsed = time.perf_counter() - start
        assert worst <= 1e-9, f"max abs error {worst}"
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def brute_force_fuse(cands, shape):
    out = np.zeros(shape)
    for y in range(shape[0]):
        for x in range(shape[1]):
            total = 0.0
            cover = 0
            for c in cands:
                if c.mask[y, x]:
                    total += c.score
                    cover += 1
            out[y, x] = total / cover if cover else 0.0
    return out


def test_fusion_oracle_equivalence():
    with criterion("fusion-oracle-equivalence"):
        rng = np.random.default_rng(7)
        shape = (32, 32)
        for _ in range(200):
            n = int(rng.integers(0, 11))
            cands = []
            for _ in range(n):
                y0, x0 = rng.integers(0, 28, size=2)
                h, w = rng.integers(1, 16, size=2)
                mask = np.zeros(shape, dtype=bool)
                mask[y0 : min(y0 + h, 32), x0 : min(x0 + w, 32)] = True
                cands.append(
                    RegionCandidate(mask=mask, score=float(rng.uniform(0, np.exp(2))),
                                    phrase="r", stage_tag=StageTag.SELECTED)
                )
            amap = fuse_with_shape(cands, shape)
            oracle = brute_force_fuse(cands, shape)
            assert np.max(np.abs(amap.values - oracle)) <= 1e-12
            validate_anomaly_map(amap, cands)  # convex combination + zero coverage
            coverage = (
                np.zeros(shape, dtype=bool)
                if not cands
                else np.any([c.mask for c in cands], axis=0)
            )
            assert not amap.values[~coverage].any()


def test_metric_correctness():
    with criterion("metric-correctness"):
        start = time.perf_counter()

        score, threshold = max_f1_pixel(
            [np.array([[0.9, 0.1, 0.8, 0.2]])], [np.array([[1, 0, 0, 1]], dtype=bool)]
        )
        assert score == pytest.approx(0.8) and 0.1 < threshold <= 0.2

        gt = np.zeros((16, 16), dtype=bool)
        gt[3:9, 4:12] = True
        assert max_f1_pixel([gt.astype(float)], [gt])[0] == 1.0

        rng = np.random.default_rng(99)
        for _ in range(500):
            pred = rng.integers(0, 256, size=(6, 7)).astype(float) / 256.0
            gt = rng.random(size=(6, 7)) < 0.3
            if not gt.any():
                gt[0, 0] = True
            base, _ = max_f1_pixel([pred], [gt])
            transformed, _ = max_f1_pixel([np.exp(2.0 * pred) + 3.0], [gt])
            assert transformed == pytest.approx(base, abs=1e-12)
            for t in rng.uniform(-0.2, 1.2, size=3):
                assert base >= f1_at_threshold([pred], [gt], float(t)) - 1e-12

        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_end_to_end_desk_benchmark(desk_manifest, desk_backend_set, desk_profile_default):
    with criterion("end-to-end-desk-benchmark"):
        start = time.perf_counter()

        full = evaluate_dataset(desk_manifest, desk_profile_default, desk_backend_set)
        assert len(full.categories) >= 3
        assert all(len(desk_manifest.by_category(c)) >= 5 for c in desk_manifest.categories)
        for cat in full.categories:
            assert cat.max_f1_pixel == 1.0, f"{cat.category}: {cat.max_f1_pixel}"

        saa = evaluate_dataset(desk_manifest, replace(desk_profile_default, mode="saa"), desk_backend_set)
        assert saa.mean_max_f1_pixel <= 0.85, f"SAA {saa.mean_max_f1_pixel}"

        table = run_ablations(desk_manifest, desk_profile_default, desk_backend_set)
        means = {row["label"]: row["report"].mean_max_f1_pixel for row in table.rows}
        assert means["full"] == 1.0
        for label in ("w/o P^L", "w/o P^P", "w/o P^S", "w/o P^C"):
            assert means[label] < means["full"], f"{label} not strictly below full"

        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_filter_properties():
    with criterion("filter-properties"):
        rng = np.random.default_rng(17)
        shape = (24, 24)
        for _ in range(500):
            n = int(rng.integers(0, 8))
            cands = []
            for k in range(n):
                y0, x0 = rng.integers(0, 20, size=2)
                h, w = rng.integers(1, 10, size=2)
                mask = np.zeros(shape, dtype=bool)
                mask[y0 : min(y0 + h, 24), x0 : min(x0 + w, 24)] = True
                cands.append(RegionCandidate(mask=mask, score=float(rng.uniform(0, 1)),
                                             phrase=f"p{k}", stage_tag=StageTag.REFINED))
            oy, ox = rng.integers(0, 12, size=2)
            obj = np.zeros(shape, dtype=bool)
            obj[oy : oy + int(rng.integers(4, 12)), ox : ox + int(rng.integers(4, 12))] = True
            theta_iou = float(rng.uniform(0, 1))
            theta_area = float(rng.uniform(0.05, 1.0))
            measure = str(rng.choice(["iou", "containment"]))

            once = property_filter(cands, obj, theta_iou, theta_area, measure)
            # output is a subsequence of input
            phrases = [c.phrase for c in cands]
            kept = [c.phrase for c in once]
            it = iter(phrases)
            assert all(p in it for p in kept)
            # idempotence
            twice = property_filter(once, obj, theta_iou, theta_area, measure)
            assert [c.phrase for c in twice] == kept
            assert [c.score for c in twice] == [c.score for c in once]
            # neutrality: theta_iou = 0 with a permissive area bound
            neutral = property_filter(cands, np.ones(shape, dtype=bool), 0.0, 1.0, "containment")
            assert [c.phrase for c in neutral] == phrases


def _cli_run(desk_root, out_dir, mode="saa+"):
    code = main(
        [
            "run",
            "--manifest", str(desk_root / "manifest.json"),
            "--profile", str(desk_root / "profile.json"),
            "--mode", mode,
            "--out", str(out_dir),
        ]
    )
    assert code == 0


def test_cmd_run_determinism(desk_root, tmp_path):
    with criterion("cmd-run-determinism"):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        _cli_run(desk_root, out1)
        _cli_run(desk_root, out2)
        names1 = sorted(p.name for p in out1.iterdir())
        names2 = sorted(p.name for p in out2.iterdir())
        assert names1 == names2
        match, mismatch, errors = filecmp.cmpfiles(out1, out2, names1, shallow=False)
        assert not mismatch and not errors, f"differing files: {mismatch or errors}"


def test_cli_service_parity(desk_root, desk_manifest, desk_backend_set, tmp_path):
    with criterion("cli-service-parity"):
        from fastapi.testclient import TestClient

        from saaplus.profiles import ProfileStore
        from saaplus.service import create_app

        profile_doc = json.loads((desk_root / "profile.json").read_text())
        variants = {
            "base": profile_doc,
            "drop-saliency": None,
            "theta-loose": None,
        }
        doc = json.loads(json.dumps(profile_doc))
        doc["profile"]["ablation_drops"] = ["saliency"]
        variants["drop-saliency"] = doc
        doc = json.loads(json.dumps(profile_doc))
        doc["profile"]["theta_iou"] = 0.2
        doc["profile"]["k_top"] = 3
        variants["theta-loose"] = doc

        # CLI runs, one output tree per profile variant
        trees = {}
        for name, document in variants.items():
            profile_path = tmp_path / f"{name}.json"
            profile_path.write_text(json.dumps(document))
            out = tmp_path / f"out_{name}"
            code = main(
                [
                    "run",
                    "--manifest", str(desk_root / "manifest.json"),
                    "--profile", str(profile_path),
                    "--mode", "saa+",
                    "--out", str(out),
                ]
            )
            assert code == 0
            trees[name] = out

        app = create_app(desk_manifest, ProfileStore(tmp_path / "profiles"), desk_backend_set)
        client = TestClient(app)

        image_ids = [e.id for e in desk_manifest.entries]
        rng = np.random.default_rng(5)
        pairs = [
            (image_ids[int(rng.integers(len(image_ids)))], name)
            for name in variants
            for _ in range(4)
        ][:10]
        assert len(pairs) == 10

        for image_id, name in pairs:
            response = client.post(
                "/api/run",
                json={"image_id": image_id, "profile": variants[name], "mode": "saa+"},
            )
            assert response.status_code == 200
            service_raw = base64.b64decode(response.json()["anomaly_map_raw"])
            cli_raw = (trees[name] / f"{image_id.replace('/', '__')}.bin").read_bytes()
            assert service_raw == cli_raw, f"map bytes differ for {image_id} / {name}"
            cli_trace = json.loads((trees[name] / f"{image_id.replace('/', '__')}.trace.json").read_text())
            assert cli_trace == response.json()["trace"]
