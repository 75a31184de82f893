"""Recompute preset paces so closed-loop gary speeds hit their targets.

Run from the repo root; paste the printed paces into gary.simulator.PRESETS.
Targets: typical -> 2.4 syll/s, dyslexic and dyslexic_inaccurate -> 2.2.
"""

import pathlib
import statistics
import sys

sys.path.insert(0, "src")

from gary.engine import Mode
from gary.harness import calibrate_pace, run_session
from gary.layout import Viewport, paginate
from gary.simulator import make_profile
from gary.text import segment_phrases, tokenize
from dataclasses import replace

TARGETS = {"typical": 2.4, "dyslexic": 2.2, "dyslexic_inaccurate": 2.2}
CALIBRATION_SEEDS = list(range(10))
CHECK_SEEDS = list(range(30))


def main() -> None:
    raw = pathlib.Path("tests/fixtures/racconto_mare.txt").read_text()
    seg = segment_phrases(tokenize(raw, "racconto_mare", ""))
    pages = paginate(seg, Viewport())
    for preset, target in TARGETS.items():
        base = make_profile(preset)
        pace = calibrate_pace(base, target, seg, pages, CALIBRATION_SEEDS,
                              lo=2.0, hi=5.0, tol=0.02)
        profile = replace(base, pace_syll_s=pace)
        speeds = [
            run_session(profile, seg, pages, Mode.GARY, seed=s).metrics.effective_speed_syll_s
            for s in CHECK_SEEDS
        ]
        print(
            f"{preset}: pace={pace:.4f} mean={statistics.fmean(speeds):.4f} "
            f"sd={statistics.stdev(speeds):.4f} "
            f"min={min(speeds):.4f} max={max(speeds):.4f} (target {target})"
        )


if __name__ == "__main__":
    main()
