"""Regenerate the PNG fixtures under tests/data from matteforge.fixtures."""
from pathlib import Path

import numpy as np

from matteforge import fixtures
from matteforge.io import save_image, save_plane, save_trimap

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for seed in fixtures.AIM_SEEDS:
        f = fixtures.aim_style(seed)
        save_image(OUT / f"aim{seed}_fg.png", f.fg)
        save_plane(OUT / f"aim{seed}_alpha.png", f.alpha)
        save_image(OUT / f"aim{seed}_bg.png", f.bg)
    b = fixtures.br_violation(0)
    save_plane(OUT / "violation_gt.png", b.alpha_gt)
    save_plane(OUT / "violation_init.png", b.alpha_init)
    save_trimap(OUT / "violation_trimap.png", b.trimap)
    f = fixtures.aim_style(0, size=64)
    save_image(OUT / "opaque_fg.png", f.fg)
    save_plane(OUT / "opaque_alpha.png", np.ones(f.alpha.shape))
    with open(OUT / "manifest.jsonl", "w", encoding="utf-8") as fh:
        for seed in fixtures.AIM_SEEDS:
            fh.write(
                f'{{"fg_path": "aim{seed}_fg.png", "alpha_path": "aim{seed}_alpha.png", '
                f'"bg_path": "aim{seed}_bg.png"}}\n'
            )


if __name__ == "__main__":
    main()
