"""Regenerate the bundled 256x256 grayscale test images in src/tvcs/data.

Sources (fetched from PyPI, not needed at runtime):

* ``barbara``, ``monarch``, ``tulips`` -- PNGs shipped in the ``sporco`` wheel.
* ``cameraman`` -- ``skimage.data.camera()``.

Each image is converted to 8-bit luma, center-cropped to a square and
resized to 256x256 with a Lanczos filter.

    python tools/make_test_images.py
"""

import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np
from PIL import Image

OUT = Path(__file__).resolve().parents[1] / "src" / "tvcs" / "data"
SPORCO_NAMES = ("barbara", "monarch", "tulips")


def _square_256(im):
    im = im.convert("L")
    w, h = im.size
    s = min(w, h)
    left, top = (w - s) // 2, (h - s) // 2
    im = im.crop((left, top, left + s, top + s))
    return np.asarray(im.resize((256, 256), Image.LANCZOS), dtype=np.uint8)


def _write(name, arr):
    h, w = arr.shape
    (OUT / f"{name}.pgm").write_bytes(b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes())
    print(f"wrote {name}.pgm")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "sporco==0.2.2.post1",
             "--no-deps", "-q", "-d", tmp],
            check=True,
        )
        wheel = next(Path(tmp).glob("sporco-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            for name in SPORCO_NAMES:
                im = Image.open(io.BytesIO(z.read(f"sporco/data/{name}.png")))
                _write(name, _square_256(im))

    from skimage import data

    _write("cameraman", _square_256(Image.fromarray(data.camera())))


if __name__ == "__main__":
    main()
