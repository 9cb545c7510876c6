"""Bundled 256x256 grayscale test images.

``barbara`` and ``monarch`` are the classic test images of those names.
Two stand-ins replace images that could not be redistributed here:
``tulips`` takes the place of *Leaves* (dense foliage texture) and
``cameraman`` the place of *Boats* (man-made objects with weak edges).
:func:`benchmark_images` returns a user-supplied PGM instead of a stand-in
whenever ``$TVCS_IMAGE_DIR/<name>.pgm`` exists.
"""

import os
from pathlib import Path

from ..image import load_pgm

DATA_DIR = Path(__file__).resolve().parent

# Benchmark role -> bundled file stem.
BENCHMARK_ROLES = {
    "barbara": "barbara",
    "leaves": "tulips",
    "monarch": "monarch",
    "boats": "cameraman",
}


def image_path(name):
    path = DATA_DIR / f"{name}.pgm"
    if not path.is_file():
        available = ", ".join(sorted(p.stem for p in DATA_DIR.glob("*.pgm")))
        raise FileNotFoundError(f"no bundled image {name!r} (available: {available})")
    return path


def load_image(name):
    """Load a bundled image on the unit scale."""
    return load_pgm(image_path(name))


def role_path(role):
    """Path for a benchmark role, preferring ``$TVCS_IMAGE_DIR/<role>.pgm``."""
    override = os.environ.get("TVCS_IMAGE_DIR")
    if override:
        candidate = Path(override) / f"{role}.pgm"
        if candidate.is_file():
            return candidate
    return image_path(BENCHMARK_ROLES[role])


def is_stand_in(role):
    return role_path(role) == image_path(BENCHMARK_ROLES[role]) and BENCHMARK_ROLES[role] != role


def benchmark_images():
    """``{role: image}`` for the four benchmark roles."""
    return {role: load_pgm(role_path(role)) for role in BENCHMARK_ROLES}
