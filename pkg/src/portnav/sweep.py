"""Robustness sweeps: evaluate a frozen policy over a grid of vessel masses
or turn rates and report per-value return statistics.

Every grid point replays the same evaluation seed set with all other
parameters at their training-time values, so curve differences are
attributable to the swept parameter alone.  Outputs are a CSV (losslessly
round-trippable) and an optional figure with a +-1 std band.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .env import EnvConfig
from .trainer import EvalStats, evaluate_policy

SWEEP_PARAMS = ("mass", "turn_rate")
SWEEP_CSV_SCHEMA = "portnav-sweep v1"
SWEEP_CSV_COLUMNS = ("param", "value", "mean_return", "std_return", "success_rate", "collision_rate", "n_episodes")


@dataclass
class SweepSpec:
    param: str  # mass | turn_rate
    values: list[float]
    episodes: int = 20
    seed: int = 2_000_000

    def __post_init__(self) -> None:
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"param must be one of {SWEEP_PARAMS}, got {self.param!r}")
        self.values = [float(v) for v in self.values]
        if not self.values:
            raise ValueError("grid must be non-empty")
        if any(v <= 0.0 for v in self.values):
            raise ValueError("grid values must be > 0")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")


@dataclass
class SweepPoint:
    value: float
    mean_return: float
    std_return: float
    success_rate: float
    collision_rate: float
    n_episodes: int


@dataclass
class SweepCurve:
    param: str
    nominal: float
    points: list[SweepPoint]  # sorted by value


def default_grids(nominal_mass: float = 175_000.0, nominal_turn_rate: float = 70.0):
    """Standard grids: mass linear over 0.25x-4x, turn rate log over 0.1x-10x."""
    mass = np.linspace(0.25 * nominal_mass, 4.0 * nominal_mass, 11)
    turn = np.geomspace(0.1 * nominal_turn_rate, 10.0 * nominal_turn_rate, 11)
    return mass, turn


def run_sweep(policy, env_cfg: EnvConfig, spec: SweepSpec, n_workers: int = 1) -> SweepCurve:
    """Evaluate the policy at each grid value of the chosen parameter.

    The swept parameter is installed at every episode start; all episodes
    at every grid point use seeds spec.seed..spec.seed+episodes-1.
    """
    nominal = getattr(env_cfg.vessel, spec.param)
    values = sorted(spec.values)

    def point(value: float) -> SweepPoint:
        params = replace(env_cfg.vessel, **{spec.param: value})
        stats: EvalStats = evaluate_policy(policy, env_cfg, spec.episodes, spec.seed, params=params)
        return SweepPoint(
            value=value,
            mean_return=stats.mean_return,
            std_return=stats.std_return,
            success_rate=stats.success_rate,
            collision_rate=stats.collision_rate,
            n_episodes=stats.n_episodes,
        )

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            points = list(pool.map(point, values))
    else:
        points = [point(v) for v in values]
    return SweepCurve(param=spec.param, nominal=nominal, points=points)


def write_outputs(
    curve: SweepCurve,
    out_dir,
    basename: Optional[str] = None,
    plot: Optional[str] = "png",
    chash: str = "",
) -> dict[str, Path]:
    """Write <basename>.csv and optionally <basename>.<plot> under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = basename or f"sweep_{curve.param}"
    csv_path = out / f"{name}.csv"
    with open(csv_path, "w") as fh:
        fh.write(f"# {SWEEP_CSV_SCHEMA} param={curve.param} nominal={curve.nominal!r} config_hash={chash}\n")
        fh.write(",".join(SWEEP_CSV_COLUMNS) + "\n")
        for p in curve.points:
            fh.write(
                ",".join(
                    [
                        curve.param,
                        repr(p.value),
                        repr(p.mean_return),
                        repr(p.std_return),
                        repr(p.success_rate),
                        repr(p.collision_rate),
                        str(p.n_episodes),
                    ]
                )
                + "\n"
            )
    paths = {"csv": csv_path}
    if plot:
        from .plots import plot_sweep

        fig_path = out / f"{name}.{plot}"
        plot_sweep(curve, fig_path)
        paths["plot"] = fig_path
    return paths


def read_curve_csv(path) -> SweepCurve:
    """Parse a sweep CSV back into the exact SweepCurve it came from."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# {SWEEP_CSV_SCHEMA}"):
        raise ValueError(f"{path} is not a {SWEEP_CSV_SCHEMA} file")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split()[2:])
    if lines[1] != ",".join(SWEEP_CSV_COLUMNS):
        raise ValueError(f"unexpected sweep CSV columns in {path}")
    points = []
    param = None
    for line in lines[2:]:
        if not line.strip():
            continue
        cells = line.split(",")
        param = cells[0]
        points.append(
            SweepPoint(
                value=float(cells[1]),
                mean_return=float(cells[2]),
                std_return=float(cells[3]),
                success_rate=float(cells[4]),
                collision_rate=float(cells[5]),
                n_episodes=int(cells[6]),
            )
        )
    if param is None:
        raise ValueError(f"{path} contains no data rows")
    return SweepCurve(param=param, nominal=float(meta["nominal"]), points=points)
