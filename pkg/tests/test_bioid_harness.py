"""End-to-end smoke test of the BioID-format harness on rendered faces."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from gazekit import serialize_landmark_file
from gazekit.synth import FaceScene, render_face

HARNESS = Path(__file__).resolve().parent.parent / "scripts" / "bioid_harness.py"


def test_harness_on_rendered_pgm_corpus(tmp_path):
    bioid = tmp_path / "bioid"
    bioid.mkdir()
    records = []
    for i in range(4):
        r = render_face(FaceScene(gaze_shift=((-1.0) ** i * 2.0, 0.0),
                                  frame_id=f"{i:06d}"))
        Image.fromarray(r.image).save(bioid / f"BioID_{i:04d}.pgm")
        # .eye files carry image-left (subject-right) coordinates first
        (bioid / f"BioID_{i:04d}.eye").write_text(
            "#LX\tLY\tRX\tRY\n"
            f"{r.right_pupil[0]} {r.right_pupil[1]} "
            f"{r.left_pupil[0]} {r.left_pupil[1]}\n")
        records.append(r.landmarks)
    sidecar = tmp_path / "landmarks.csv"
    sidecar.write_bytes(serialize_landmark_file(records))

    out = tmp_path / "eval"
    proc = subprocess.run(
        [sys.executable, str(HARNESS), "--bioid-dir", str(bioid),
         "--landmarks", str(sidecar), "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads((out / "eval_summary.json").read_text())
    assert doc["n"] == 4
    assert doc["accuracy_at"]["0.25"] == 1.0
    index_map = (out / "index_map.csv").read_text()
    assert "0,000000,BioID_0000.pgm,BioID_0000.eye" in index_map
