#!/usr/bin/env python3
"""Assemble the stereo benchmark datasets under datasets/.

Two sources:

  * Motorcycle (Middlebury 2014, quarter resolution) is bundled with
    scikit-image, so it needs no network access. The pair is exported as
    binary PPMs and the float ground truth as a grayscale PFM.

  * Cones/Teddy (Middlebury 2003, quarter size) and Venus/Sawtooth
    (Middlebury 2001) are downloaded from vision.middlebury.edu and
    converted to PPM/PGM. For the 2001 sets, whose ground truth is dense,
    a non-occlusion mask is derived from the ground truth by forward-warp
    visibility (standard left-right uniqueness); the 2003/2014 ground
    truths already mark occlusions as unknown.

Usage: python3 scripts/prepare_datasets.py [--only NAME] [--dest datasets]
"""

import argparse
import io
import struct
import sys
import urllib.request
from pathlib import Path

MIDDLEBURY = "https://vision.middlebury.edu/stereo/data"

SCENES_2003 = {
    "cones": f"{MIDDLEBURY}/scenes2003/newdata/cones",
    "teddy": f"{MIDDLEBURY}/scenes2003/newdata/teddy",
}
SCENES_2001 = {
    "venus": f"{MIDDLEBURY}/scenes2001/data/venus",
    "sawtooth": f"{MIDDLEBURY}/scenes2001/data/sawtooth",
}


def write_ppm(path: Path, rgb) -> None:
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(rgb.astype("uint8").tobytes())


def write_pgm(path: Path, gray) -> None:
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(gray.astype("uint8").tobytes())


def write_pfm(path: Path, disp) -> None:
    """Grayscale PFM, little endian, bottom row first."""
    h, w = disp.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
        for row in disp[::-1]:
            f.write(struct.pack("<%df" % w, *row))


def fetch(url: str) -> bytes:
    print(f"  fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def prepare_motorcycle(dest: Path) -> None:
    import numpy as np
    from skimage import data

    print("motorcycle (bundled with scikit-image)")
    left, right, disp = data.stereo_motorcycle()
    out = dest / "motorcycle"
    out.mkdir(parents=True, exist_ok=True)
    write_ppm(out / "im0.ppm", left)
    write_ppm(out / "im1.ppm", right)
    # occlusions/unknown are +inf in the packaged ground truth
    write_pfm(out / "disp0.pfm", np.asarray(disp, dtype="float32"))


def prepare_2003(name: str, dest: Path) -> None:
    import numpy as np
    from PIL import Image

    print(f"{name} (Middlebury 2003, quarter size)")
    base = SCENES_2003[name]
    out = dest / name
    out.mkdir(parents=True, exist_ok=True)
    for src, target in [("im2.png", "im2.ppm"), ("im6.png", "im6.ppm")]:
        img = Image.open(io.BytesIO(fetch(f"{base}/{src}"))).convert("RGB")
        write_ppm(out / target, np.asarray(img))
    # ground truth: gray = disparity * 4, 0 = unknown/occluded
    gt = Image.open(io.BytesIO(fetch(f"{base}/disp2.png"))).convert("L")
    write_pgm(out / "disp2.pgm", np.asarray(gt))


def derive_nonocc(gt_disp) -> "np.ndarray":
    """Forward-warp visibility: a left pixel is non-occluded when no other
    pixel with larger disparity lands on (or crosses) the same right-image
    column."""
    import numpy as np

    h, w = gt_disp.shape
    mask = np.zeros((h, w), dtype="uint8")
    for v in range(h):
        best = np.full(w, -1.0)
        owner = np.full(w, -1, dtype=int)
        for u in range(w):
            d = gt_disp[v, u]
            if not np.isfinite(d) or d <= 0:
                continue
            xr = int(round(u - d))
            if xr < 0 or xr >= w:
                continue
            if d > best[xr]:
                best[xr] = d
                owner[xr] = u
        keep = owner[owner >= 0]
        mask[v, keep] = 255
    return mask


def prepare_2001(name: str, dest: Path) -> None:
    import numpy as np

    print(f"{name} (Middlebury 2001)")
    base = SCENES_2001[name]
    out = dest / name
    out.mkdir(parents=True, exist_ok=True)
    for src in ["im2.ppm", "im6.ppm", "disp2.pgm"]:
        (out / src).write_bytes(fetch(f"{base}/{src}"))
    # dense 2001 ground truth: derive the non-occlusion mask (gray = d * 8)
    from PIL import Image

    gt = np.asarray(Image.open(out / "disp2.pgm"), dtype="float64") / 8.0
    gt[gt == 0] = np.nan
    write_pgm(out / "nonocc.pgm", derive_nonocc(gt))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", help="prepare a single dataset by name")
    parser.add_argument("--dest", default="datasets", type=Path)
    args = parser.parse_args()

    steps = {
        "motorcycle": prepare_motorcycle,
        "cones": lambda dest: prepare_2003("cones", dest),
        "teddy": lambda dest: prepare_2003("teddy", dest),
        "venus": lambda dest: prepare_2001("venus", dest),
        "sawtooth": lambda dest: prepare_2001("sawtooth", dest),
    }
    if args.only:
        if args.only not in steps:
            parser.error(f"unknown dataset {args.only}; choose from {sorted(steps)}")
        steps = {args.only: steps[args.only]}

    failures = []
    for name, step in steps.items():
        try:
            step(args.dest)
        except Exception as exc:  # keep going; report at the end
            print(f"  {name}: FAILED ({exc})")
            failures.append(name)

    if failures:
        print(f"\nincomplete: {', '.join(failures)}")
        print("(the Middlebury downloads need network access; the bundled "
              "motorcycle set works offline)")
        return 1
    print("\nall datasets ready")
    return 0


if __name__ == "__main__":
    sys.exit(main())
