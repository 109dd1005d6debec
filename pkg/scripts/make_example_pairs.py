"""Build the bundled synthetic pair collection (src/colp/datasets/pairs).

Each pair is drawn from a COLP causal model with known direction.  A draw is
kept only if the likelihood comparison recovers the direction with a gap of
at least MIN_GAP; otherwise the next seed is tried.  Run from the repo root:

    python scripts/make_example_pairs.py
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from colp.causal import decide
from colp.ingest import PairFile, example_pairs_dir, read_pair
from colp.links import LOGIT
from colp.permutations import Permutation
from colp.synth import calibrate_thresholds, replication_rng

MIN_GAP = 5.0

# name, cause column, cause levels, effect column, effect levels (lowest rank
# first gives the true ordering), n, truth as written in the manifest
SPECS = [
    ("shelf", "mfr", ["General Mills", "Kelloggs", "Nabisco", "Post", "Quaker"],
     "shelf", ["bottom", "top", "middle"], 2000, "x_to_y"),
    ("material_span", "material", ["iron", "steel", "wood"],
     "span", ["short", "medium", "long"], 2000, "x_to_y"),
    ("sport_height", "height", ["short", "average", "tall", "very tall"],
     "sport", ["gymnastics", "boxing", "volleyball", "basketball"], 2500, "y_to_x"),
    ("dose_response", "dose", ["d0", "d1", "d2", "d3"],
     "response", None, 3000, "x_to_y"),
    ("region_choice", "region", ["north", "south", "east", "west", "central", "coast"],
     "choice", ["rail", "bus", "car", "bike", "walk"], 3000, "x_to_y"),
    ("treatment_outcome", "treatment", ["A", "B", "C", "D", "E"],
     "outcome", ["worse", "same", "better", "cured", "relapse"], 3000, "y_to_x"),
]


def _draw(rng, probs):
    cum = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    return (u[:, None] >= cum[:, :-1]).sum(axis=1)


def colp_pair(rng, S, L, n, sigma: Permutation):
    """Cause codes 0..S-1 and effect codes 0..L-1 from a COLP model."""
    omega = rng.dirichlet(np.full(S, 5.0))
    beta = rng.normal(0.0, 1.5, size=S)
    cal = calibrate_thresholds(beta, omega, LOGIT, L)
    g = np.concatenate(([-np.inf], cal.gamma, [np.inf]))
    by_rank = LOGIT.interval_prob(g[:-1][None, :] - cal.beta[:, None], g[1:][None, :] - cal.beta[:, None])
    cond = by_rank[:, np.asarray(sigma.map) - 1]
    x = _draw(rng, np.broadcast_to(omega, (n, S)))
    y = _draw(rng, cond[x])
    return x, y


def continuous_pair(rng, S, n):
    beta = np.sort(rng.normal(0.0, 1.5, size=S))
    x = rng.integers(0, S, size=n)
    y = beta[x] + rng.logistic(size=n)
    return x, y


def build(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for idx, (name, cname, clevels, ename, elevels, n, truth) in enumerate(SPECS):
        for attempt in range(100):
            rng = replication_rng(20240601 + idx, attempt)
            S = len(clevels)
            if elevels is None:
                x, yv = continuous_pair(rng, S, n)
                effect = [f"{v:.4f}" for v in yv]
                discretize = 5
            else:
                L = len(elevels)
                # the listed effect order is the true ranking
                sigma = Permutation(tuple(range(1, L + 1)))
                x, y = colp_pair(rng, S, L, n, sigma)
                effect = [elevels[k] for k in y]
                discretize = None
            cause = [clevels[k] for k in x]
            if truth == "x_to_y":
                cols, rows = (cname, ename), zip(cause, effect)
                xcol, ycol, dx, dy = cname, ename, None, discretize
            else:
                cols, rows = (ename, cname), zip(effect, cause)
                xcol, ycol, dx, dy = ename, cname, discretize, None
            path = out_dir / f"{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(cols)
                w.writerows(rows)
            sample = read_pair(PairFile(str(path), xcol, ycol, discretize_x=dx, discretize_y=dy))
            verdict = decide(sample)
            sign = 1 if truth == "x_to_y" else -1
            if verdict.decision == truth and sign * verdict.log_likelihood_gap >= MIN_GAP:
                print(f"{name}: seed attempt {attempt}, gap {verdict.log_likelihood_gap:.2f}")
                break
        else:
            raise SystemExit(f"{name}: no draw recovered the direction")
        manifest.append(
            {
                "file": f"{name}.csv",
                "x_column": xcol,
                "y_column": ycol,
                "truth": truth,
                "description": f"synthetic COLP pair, {cname} causes {ename}, n={n}",
                "discretize_x": dx or "",
                "discretize_y": dy or "",
            }
        )
    with open(out_dir / "pairs.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(manifest[0]))
        w.writeheader()
        w.writerows(manifest)


if __name__ == "__main__":
    build(example_pairs_dir())
