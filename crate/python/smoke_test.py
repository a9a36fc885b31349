#!/usr/bin/env python3
"""Smoke test for the radiomx_py extension module.

Builds nothing itself: run `cargo build -p radiomx-py` (or --release) first,
then `python3 python/smoke_test.py`. The script locates the cdylib under
target/, imports it and drives a miniature extract -> train -> evaluate flow.
"""

import json
import math
import random
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def import_radiomx_py():
    candidates = [
        REPO_ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libradiomx_py.so", "radiomx_py.so", "libradiomx_py.dylib")
    ]
    for built in candidates:
        if built.exists():
            stage = Path(tempfile.mkdtemp(prefix="radiomx_py_"))
            shutil.copy2(built, stage / "radiomx_py.so")
            sys.path.insert(0, str(stage))
            import radiomx_py

            return radiomx_py
    sys.exit(
        "radiomx_py cdylib not found; run `cargo build -p radiomx-py` first"
    )


def make_case(rx, rng, case_class):
    """Synthetic 6x5x3 image + ellipsoid mask with class-dependent texture."""
    dims = (6, 5, 3)
    spacing = (1.0, 1.0, 2.0)
    data = []
    for k in range(dims[2]):
        for j in range(dims[1]):
            for i in range(dims[0]):
                if case_class == 1:
                    value = 120.0 + 8.0 * i + rng.uniform(-5.0, 5.0)
                else:
                    value = 60.0 + rng.uniform(-40.0, 40.0)
                data.append(value)
    labels = []
    for k in range(dims[2]):
        for j in range(dims[1]):
            for i in range(dims[0]):
                di = (i - 2.5) / 2.4
                dj = (j - 2.0) / 2.0
                dk = (k - 1.0) / 1.2
                labels.append(1 if di * di + dj * dj + dk * dk <= 1.0 else 0)
    image = rx.Volume.from_data(dims, spacing, data)
    mask = rx.MaskVolume.from_data(dims, spacing, labels)
    return image, mask


def main():
    rx = import_radiomx_py()
    rng = random.Random(20240615)

    # Volume I/O round trip.
    with tempfile.TemporaryDirectory() as tmp:
        image, mask = make_case(rx, rng, 1)
        img_path = str(Path(tmp) / "case.nrrd")
        image.write(img_path)
        back = rx.Volume.read(img_path)
        assert back.dims == image.dims, "dims round trip"
        assert back.spacing == image.spacing, "spacing round trip"
        assert back.data == image.data, "data round trip must be bit exact"
        rx.validate_geometry(image, mask)

    # Feature extraction: 120 named features, all finite.
    feats = rx.extract_features(image, mask, label=1, bin_width=25.0)
    assert len(feats) == 120, f"expected 120 features, got {len(feats)}"
    assert all(math.isfinite(v) for v in feats.values())
    prefixes = ("firstorder_", "shape3d_", "shape2d_", "glcm_", "glrlm_", "glszm_", "gldm_", "ngtdm_")
    counts = {p: sum(1 for n in feats if n.startswith(p)) for p in prefixes}
    assert counts == {
        "firstorder_": 19,
        "shape3d_": 16,
        "shape2d_": 10,
        "glcm_": 24,
        "glrlm_": 16,
        "glszm_": 16,
        "gldm_": 14,
        "ngtdm_": 5,
    }, f"per-class counts wrong: {counts}"

    # Build a 24-case table and run the training pipeline.
    case_ids, rows, labels = [], [], []
    names = list(feats.keys())
    for c in range(24):
        case_class = 1 if c % 2 == 0 else 0
        img, msk = make_case(rx, rng, case_class)
        f = rx.extract_features(img, msk)
        assert list(f.keys()) == names, "feature order must be stable"
        case_ids.append(f"case{c:03}")
        rows.append(list(f.values()))
        labels.append(case_class)
    table = rx.FeatureTable.from_rows(case_ids, names, rows, labels)
    assert table.n_rows == 24 and table.n_features == 120

    config = json.dumps(
        {"pca_k": 8, "data_seed": 7, "smote_k": 3, "train": {"epochs": 40, "seed": 3}}
    )
    model, report_json = rx.train(table, config)
    report = json.loads(report_json)
    assert report["train_cases"] + report["test_cases"] == 24
    assert len(report["explained_variance_pct"]) == 8
    assert len(report["history"]) == 40
    assert model.pca_k == 8

    # Persistence round trip and deterministic re-evaluation.
    with tempfile.TemporaryDirectory() as tmp:
        model_path = str(Path(tmp) / "model.json")
        model.save(model_path)
        loaded = rx.PipelineModel.load(model_path)
        assert loaded.to_json() == model.to_json(), "model JSON round trip"

        labels_a, probs_a = model.predict(table)
        labels_b, probs_b = loaded.predict(table)
        assert labels_a == labels_b and probs_a == probs_b, "prediction determinism"

    eval_report = json.loads(rx.evaluate(model, table))
    assert eval_report["cases"] == 24
    cm = eval_report["confusion"]
    assert cm["tp"] + cm["fp"] + cm["fn_"] + cm["tn"] == 24
    acc = eval_report["metrics"]["accuracy"]
    assert acc is not None and 0.0 <= acc <= 1.0
    # The classes are synthetically separable; the fitted pipeline should
    # score very well on its own training distribution.
    assert acc >= 0.9, f"expected high accuracy on separable data, got {acc}"

    # Feature CSV round trip through the table API.
    with tempfile.TemporaryDirectory() as tmp:
        csv_path = str(Path(tmp) / "features.csv")
        table.write_csv(csv_path)
        back = rx.FeatureTable.read_csv(csv_path)
        assert back.case_ids == table.case_ids
        assert back.feature_names == table.feature_names
        assert back.labels == table.labels

    print("radiomx_py smoke test passed")


if __name__ == "__main__":
    main()
