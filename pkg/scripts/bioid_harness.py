#!/usr/bin/env python3
"""Ready-to-run harness for a BioID-format localization benchmark.

The BioID corpus ships ``BioID_XXXX.pgm`` frontal face images together with
``BioID_XXXX.eye`` files holding ``LX LY RX RY`` eye centers, where LX/LY is
the eye on the image's left (the subject's right eye).  This script adapts
such a directory to the toolkit's corpus layout and runs labeling plus the
normalized-error evaluation:

    python scripts/bioid_harness.py --bioid-dir /data/BioID \\
        --landmarks /data/bioid_landmarks.csv --out /tmp/bioid-eval

The corpus itself bundles no facial-landmark detector, so you must supply a
standard 68-point landmark sidecar produced by any external detector, one
record per image, with frame ids equal to the zero-padded image index
(``000000`` for the alphabetically first .pgm).  The harness writes an
``index_map.csv`` so you can generate or check those ids, converts the .eye
ground truth into the evaluator's format, and prints the accuracy report at
e <= 0.05 / 0.10 / 0.25.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gazekit.cli import main as gazekit_main


def convert_eye_files(bioid_dir: Path, out: Path) -> tuple[list[str], Path]:
    pgms = sorted(bioid_dir.glob("*.pgm"))
    if not pgms:
        raise SystemExit(f"no .pgm images under {bioid_dir}")
    truth_lines = []
    index_lines = ["index,frame_id,image,eye_file"]
    for idx, pgm in enumerate(pgms):
        frame_id = f"{idx:06d}"
        eye_file = pgm.with_suffix(".eye")
        index_lines.append(f"{idx},{frame_id},{pgm.name},{eye_file.name}")
        if not eye_file.exists():
            continue
        numbers = []
        for line in eye_file.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            numbers.extend(float(v) for v in line.split())
        if len(numbers) != 4:
            print(f"warning: {eye_file.name} does not hold 4 numbers; skipped",
                  file=sys.stderr)
            continue
        img_left_x, img_left_y, img_right_x, img_right_y = numbers
        # image-left eye = subject's right eye; our format is subject-first
        truth_lines.append(f"bioid/{frame_id},{img_right_x},{img_right_y},"
                           f"{img_left_x},{img_left_y}\n")
    truth_path = out / "truth.csv"
    truth_path.write_text("".join(truth_lines), encoding="utf-8")
    (out / "index_map.csv").write_text("\n".join(index_lines) + "\n", encoding="utf-8")
    return [str(p) for p in pgms], truth_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bioid-dir", required=True, type=Path)
    parser.add_argument("--landmarks", required=True, type=Path,
                        help="68-point sidecar keyed by zero-padded image index")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--offset", type=int, default=5)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    frames, truth_path = convert_eye_files(args.bioid_dir, args.out)
    manifest = {"subjects": [{
        "id": "bioid",
        "frames": frames,
        "landmarks": str(args.landmarks.resolve()),
    }]}
    manifest_path = args.out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    rc = gazekit_main(["label", str(manifest_path), "--out", str(args.out),
                       "--stride", "1", "--offset", str(args.offset)])
    if rc != 0:
        return rc
    return gazekit_main(["eval", str(args.out / "labels.csv"), str(truth_path),
                         "--out-dir", str(args.out)])


if __name__ == "__main__":
    sys.exit(main())
