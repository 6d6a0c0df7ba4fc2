#!/usr/bin/env python3
"""Build the 256x256 RGB benchmark fixtures under data/benchmarks/.

Lena and Baboon come from the npm packages `lena` and `baboon-image`
(fetched with `npm pack`). The remaining six are natural colour images
bundled with scikit-image and matplotlib. Every image is centre-cropped
to a square and resampled to 256x256 with a Lanczos filter.
"""
import argparse
import base64
import pathlib
import re
import subprocess
import tarfile
import tempfile

import matplotlib
import numpy as np
import skimage.data
from PIL import Image

SIZE = 256


def square(img: Image.Image) -> Image.Image:
    w, h = img.size
    s = min(w, h)
    left, top = (w - s) // 2, (h - s) // 2
    img = img.crop((left, top, left + s, top + s)).convert("RGB")
    return img.resize((SIZE, SIZE), Image.LANCZOS)


def npm_member(workdir: pathlib.Path, package: str, member: str) -> bytes:
    out = subprocess.run(["npm", "pack", package], cwd=workdir, check=True,
                         capture_output=True, text=True).stdout.strip().splitlines()[-1]
    with tarfile.open(workdir / out) as tar:
        return tar.extractfile(f"package/{member}").read()


def lena(workdir: pathlib.Path) -> Image.Image:
    js = npm_member(workdir, "lena", "lena.js").decode()
    raw = base64.b64decode(re.search(r"base64decode\(\s*'([^']+)'", js).group(1))
    # the packed buffer is column-major in (row, col): transpose to row-major
    return Image.fromarray(np.frombuffer(raw, np.uint8).reshape(512, 512, 3).transpose(1, 0, 2))


def baboon(workdir: pathlib.Path) -> Image.Image:
    path = workdir / "baboon.png"
    path.write_bytes(npm_member(workdir, "baboon-image", "baboon.png"))
    return Image.open(path)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parents[1] / "data" / "benchmarks",
                        type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    mpl_sample = pathlib.Path(matplotlib.get_data_path()) / "sample_data" / "grace_hopper.jpg"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        images = {
            "lena": lena(tmp),
            "baboon": baboon(tmp),
            "astronaut": Image.fromarray(skimage.data.astronaut()),
            "coffee": Image.fromarray(skimage.data.coffee()),
            "chelsea": Image.fromarray(skimage.data.chelsea()),
            "rocket": Image.fromarray(skimage.data.rocket()),
            "motorcycle": Image.fromarray(skimage.data.stereo_motorcycle()[0]),
            "hopper": Image.open(mpl_sample),
        }
        for name, img in images.items():
            square(img).save(args.out / f"{name}.png")
            print(f"wrote {args.out / (name + '.png')}")


if __name__ == "__main__":
    main()
