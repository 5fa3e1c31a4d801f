"""Swap phase and magnitude between two images.

Renders two shape scenes, mixes the Fourier phase of one with the
magnitude of the other (both directions), and measures which source the
mixture's structure follows.  The edge overlap with the phase donor is
consistently much higher than with the magnitude donor: spatial layout
lives in the phase spectrum.

Writes PGM files under demos/out/.
"""

from pathlib import Path

import numpy as np

from phasediff import make_rng
from phasediff.corpus import ShapeSpec, render_pair
from phasediff.io import write_pgm
from phasediff.metrics import edge_iou
from phasediff.spectral import phase_mix

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

size = 128
scene_a = render_pair(
    [
        ShapeSpec("ellipse", 45.0, 50.0, 24.0, 17.0, 0.4, 0.92),
        ShapeSpec("rectangle", 88.0, 84.0, 18.0, 12.0, 1.1, 0.15),
    ],
    size,
    make_rng(1),
    background=0.55,
).shaded
scene_b = render_pair(
    [
        ShapeSpec("rectangle", 40.0, 88.0, 21.0, 21.0, 0.0, 0.05),
        ShapeSpec("ellipse", 90.0, 38.0, 14.0, 26.0, 2.3, 0.85),
    ],
    size,
    make_rng(2),
    background=0.35,
).shaded

mix_ab = phase_mix(scene_a, scene_b)  # phase from A, magnitude from B
mix_ba = phase_mix(scene_b, scene_a)

write_pgm(OUT / "mix_scene_a.pgm", scene_a)
write_pgm(OUT / "mix_scene_b.pgm", scene_b)
write_pgm(OUT / "mix_phaseA_magB.pgm", mix_ab)
write_pgm(OUT / "mix_phaseB_magA.pgm", mix_ba)

print("edge overlap of each mixture with its two sources:")
print(f"  phase A + magnitude B: IoU vs A = {edge_iou(mix_ab, scene_a):.3f}, "
      f"vs B = {edge_iou(mix_ab, scene_b):.3f}")
print(f"  phase B + magnitude A: IoU vs B = {edge_iou(mix_ba, scene_b):.3f}, "
      f"vs A = {edge_iou(mix_ba, scene_a):.3f}")
print(f"self-mix sanity: max|phase_mix(a,a) - a| = "
      f"{np.max(np.abs(phase_mix(scene_a, scene_a) - scene_a)):.2e}")
print(f"wrote 4 images to {OUT}")
