"""Configuration-driven Monte Carlo runner.

Seed derivation: every random stream is a Philox generator keyed by the
tuple (master_seed, grid_index, replicate_index, stream_tag) through numpy's
SeedSequence, with stream tags graph=0, treat=1, noise=2, solver=3.
Replicates therefore never share randomness, results do not depend on the
number of workers or on scheduling, and a fixed master seed reproduces every
emitted number bit for bit.

Results are written as a CSV with columns
    replicate,estimator,estimate,n,rho,seed
plus a sidecar JSON metadata file (canonical config, its SHA-256 fingerprint,
population estimands, and the theory module's variance predictions) so the
plotting layer never recomputes theory overlays.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import theory
from .estimands import population_estimands
from .estimators import (
    EstimateRecord,
    hajek_direct,
    ht_direct,
    oracle_pc_indirect,
    pc_balancing_indirect,
    unbiased_indirect,
    unbiased_total,
    v_hat,
)
from .experiment import assign_bernoulli, realize
from .graphons import (
    Graphon,
    SampledNetwork,
    UnsupportedEigenstructureError,
    sample_network,
    true_eigensystem,
)
from .presets import build_graphon, build_outcome, build_sparsity
from .spectral import top_abs_eigs

WORKERS_ENV = "GRAPHON_INTERFERENCE_WORKERS"
STREAM_TAGS = {"graph": 0, "treat": 1, "noise": 2, "solver": 3}
ESTIMATOR_NAMES = (
    "ht_dir",
    "haj_dir",
    "unb_tot",
    "unb_ind",
    "pc_ind",
    "pc_tot",
    "oracle_pc_ind",
    "vhat",
)

CSV_COLUMNS = ("replicate", "estimator", "estimate", "n", "rho", "seed")
SWEEP_COLUMNS = ("n", "rho", "estimator", "mse", "bias", "variance", "replicates")

# which population estimand each estimator is measured against in sweeps
ESTIMATOR_TARGETS = {
    "ht_dir": "tau_dir",
    "haj_dir": "tau_dir",
    "unb_tot": "tau_tot",
    "pc_tot": "tau_tot",
    "unb_ind": "tau_ind",
    "pc_ind": "tau_ind",
    "oracle_pc_ind": "tau_ind",
    "vhat": "tau_ind",
}
SLOPE_COLUMNS = ("estimator", "exponent", "slope", "intercept", "stderr")


class HarnessConfigError(ValueError):
    """Raised for invalid or inconsistent run configurations."""


@dataclass(frozen=True)
class RunConfig:
    graphon: object
    outcome: object
    pi: float
    estimators: tuple[str, ...]
    replicates: int
    n: Optional[int] = None
    n_grid: tuple[int, ...] = ()
    sparsity: object = None
    rank: int = 3
    seed: int = 0
    fixed_network: bool = False
    vhat_pi_prime: Optional[float] = None
    workers: int = 1

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        cfg = dict(raw)
        try:
            return RunConfig(
                graphon=cfg.pop("graphon"),
                outcome=cfg.pop("outcome"),
                pi=float(cfg.pop("pi")),
                estimators=tuple(cfg.pop("estimators")),
                replicates=int(cfg.pop("replicates")),
                n=cfg.pop("n", None),
                n_grid=tuple(cfg.pop("n_grid", ())),
                sparsity=cfg.pop("sparsity", None),
                rank=int(cfg.pop("rank", 3)),
                seed=int(cfg.pop("seed", 0)),
                fixed_network=bool(cfg.pop("fixed_network", False)),
                vhat_pi_prime=cfg.pop("vhat_pi_prime", None),
                workers=int(cfg.pop("workers", 1)),
            )
        except KeyError as exc:
            raise HarnessConfigError(f"missing config field {exc}") from None

    def validate(self):
        if self.replicates < 1:
            raise HarnessConfigError("need at least one replicate")
        if not 0 < self.pi < 1:
            raise HarnessConfigError("pi must lie strictly in (0,1)")
        if not self.estimators:
            raise HarnessConfigError("estimator list is empty")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise HarnessConfigError(f"unknown estimators {sorted(unknown)}")
        if self.n is None and not self.n_grid:
            raise HarnessConfigError("config needs n or a nonempty n_grid")
        # fail fast on unbuildable specs
        build_graphon(self.graphon)
        build_outcome(self.outcome, pi=self.pi)
        build_sparsity(self.sparsity)


def canonical_config(config: RunConfig) -> dict:
    """Semantic fields only, fully materialized (execution knobs excluded)."""
    return {
        "graphon": config.graphon,
        "outcome": config.outcome,
        "pi": config.pi,
        "estimators": list(config.estimators),
        "replicates": config.replicates,
        "n": config.n,
        "n_grid": list(config.n_grid),
        "sparsity": config.sparsity,
        "rank": config.rank,
        "seed": config.seed,
        "fixed_network": config.fixed_network,
        "vhat_pi_prime": config.vhat_pi_prime,
    }


def config_fingerprint(config: RunConfig) -> str:
    payload = json.dumps(canonical_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def stream_seed(master: int, grid_index: int, replicate: int, stream: str) -> tuple:
    return (int(master), int(grid_index), int(replicate), STREAM_TAGS[stream])


@dataclass
class ResultTable:
    rows: list  # tuples matching CSV_COLUMNS
    metadata: dict
    aux: dict = field(default_factory=dict)  # (replicate, estimator) -> diagnostics

    def estimates(self, estimator: str) -> np.ndarray:
        return np.array([r[2] for r in self.rows if r[1] == estimator])

    def write(self, csv_path: str):
        _write_csv(csv_path, CSV_COLUMNS, self.rows)
        _write_metadata(csv_path, self.metadata)


def _write_csv(path: str, columns, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def metadata_path(csv_path: str) -> str:
    return csv_path[:-4] + ".meta.json" if csv_path.endswith(".csv") else csv_path + ".meta.json"


def _write_metadata(csv_path: str, metadata: dict):
    with open(metadata_path(csv_path), "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _compute_estimates(
    spec: Graphon,
    net: SampledNetwork,
    realization,
    config: RunConfig,
    solver_seed,
) -> list[EstimateRecord]:
    Y, W, M, N, pi = (
        realization.Y,
        realization.W,
        realization.M,
        realization.N,
        config.pi,
    )
    records = []
    eigs = None
    needs_eigs = {"pc_ind", "pc_tot"} & set(config.estimators)
    if needs_eigs:
        eigs = top_abs_eigs(net.E, r=config.rank, seed=solver_seed)
    for name in config.estimators:
        if name == "ht_dir":
            records.append(EstimateRecord(name, ht_direct(Y, W, pi)))
        elif name == "haj_dir":
            records.append(EstimateRecord(name, hajek_direct(Y, W)))
        elif name == "unb_tot":
            records.append(EstimateRecord(name, unbiased_total(Y, W, M, N, pi)))
        elif name == "unb_ind":
            records.append(EstimateRecord(name, unbiased_indirect(Y, W, M, N, pi)))
        elif name == "pc_ind":
            value, diag = pc_balancing_indirect(Y, W, net, pi, config.rank, eigs=eigs)
            records.append(
                EstimateRecord(name, value, aux={"balance_residual": float(diag.residuals.max())})
            )
        elif name == "pc_tot":
            value, diag = pc_balancing_indirect(Y, W, net, pi, config.rank, eigs=eigs)
            records.append(
                EstimateRecord(
                    name,
                    value + ht_direct(Y, W, pi),
                    aux={"balance_residual": float(diag.residuals.max())},
                )
            )
        elif name == "oracle_pc_ind":
            psi = np.column_stack(
                [psi_k(net.U) for _, psi_k in true_eigensystem(spec)[: config.rank]]
            )
            records.append(EstimateRecord(name, oracle_pc_indirect(Y, W, net, pi, psi)))
        elif name == "vhat":
            pi_prime = config.pi if config.vhat_pi_prime is None else config.vhat_pi_prime
            records.append(EstimateRecord(name, v_hat(Y, W, M, N, pi, pi_prime)))
        else:  # pragma: no cover - validated earlier
            raise HarnessConfigError(f"unknown estimator {name!r}")
    return records


def _one_replicate(config: RunConfig, grid_index: int, n: int, rho: float, rep: int):
    spec = build_graphon(config.graphon)
    model = build_outcome(config.outcome, pi=config.pi)
    graph_rep = 0 if config.fixed_network else rep
    net = sample_network(
        spec, n, rho, seed=stream_seed(config.seed, grid_index, graph_rep, "graph")
    )
    W = assign_bernoulli(n, config.pi, seed=stream_seed(config.seed, grid_index, rep, "treat"))
    realization = realize(
        net, model, W, config.pi, noise_seed=stream_seed(config.seed, grid_index, rep, "noise")
    )
    records = _compute_estimates(
        spec, net, realization, config, stream_seed(config.seed, grid_index, rep, "solver")
    )
    return [(rep, r.name, r.value, n, rho, config.seed, r.aux) for r in records]


def _worker(payload):
    raw, grid_index, n, rho, rep = payload
    return _one_replicate(RunConfig.from_dict(raw), grid_index, n, rho, rep)


def _worker_count(config: RunConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, config.workers)


def _run_grid_point(config: RunConfig, grid_index: int, n: int, rho: float):
    """All replicates at one (n, rho); returns raw rows sorted by replicate."""
    workers = _worker_count(config)
    reps = range(config.replicates)
    if workers == 1:
        results = [_one_replicate(config, grid_index, n, rho, rep) for rep in reps]
    else:
        payloads = [
            (dict(canonical_config(config)), grid_index, n, rho, rep) for rep in reps
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, payloads, chunksize=max(1, len(payloads) // (4 * workers))))
    rows, aux = [], {}
    for rep_rows in results:
        for rep, name, value, nn, rr, seed, rec_aux in rep_rows:
            rows.append((rep, name, value, nn, rr, seed))
            if rec_aux:
                aux[(rep, name)] = rec_aux
    rows.sort(key=lambda r: (r[3], r[0], r[1]))
    return rows, aux


def _theory_metadata(config: RunConfig, n: int, rho: float) -> dict:
    spec = build_graphon(config.graphon)
    model = build_outcome(config.outcome, pi=config.pi)
    pop = population_estimands(spec, model, config.pi)
    out = {
        "estimands": {
            "tau_dir": pop.tau_dir,
            "tau_ind": pop.tau_ind,
            "tau_tot": pop.tau_tot,
        },
        "n": n,
        "rho": rho,
    }
    try:
        pred = theory.direct_clt(spec, model, config.pi)
        out["direct"] = {
            "ht_variance": pred.variance("ht", "population"),
            "hajek_variance": pred.variance("hajek", "population"),
            "ht_naive_variance": pred.naive_variance("ht", "population"),
            "hajek_naive_variance": pred.naive_variance("hajek", "population"),
            "components": pred.components,
        }
        out["overlays"] = _overlays(pop, pred, n)
    except theory.PreconditionError as exc:
        out["direct"] = {"unavailable": str(exc)}
    try:
        ind = theory.indirect_clt(spec, model, config.pi, r=config.rank)
        out["indirect"] = {"sigma2_ind": ind.sigma2_ind, "rank": ind.rank}
        out.setdefault("overlays", {})["pc_ind"] = {
            "mean": pop.tau_ind,
            "sd": float(np.sqrt(rho * ind.sigma2_ind)),
        }
    except (UnsupportedEigenstructureError, ValueError) as exc:
        out["indirect"] = {"unavailable": str(exc)}
    nu = theory.unbiased_variance_scale(spec, model, config.pi)
    out["unbiased_scale_nu"] = nu
    out.setdefault("overlays", {})["unb_ind"] = {
        "mean": pop.tau_ind,
        "sd": float(np.sqrt(nu * n * rho * rho)),
    }
    return out


def _overlays(pop, pred, n: int) -> dict:
    return {
        "ht_dir": {
            "mean": pop.tau_dir,
            "sd": float(np.sqrt(pred.variance("ht", "population") / n)),
            "sd_naive": float(np.sqrt(pred.naive_variance("ht", "population") / n)),
        },
        "haj_dir": {
            "mean": pop.tau_dir,
            "sd": float(np.sqrt(pred.variance("hajek", "population") / n)),
            "sd_naive": float(np.sqrt(pred.naive_variance("hajek", "population") / n)),
        },
    }


def run_replications(config: RunConfig) -> ResultTable:
    """Fresh (or fixed) network, fresh W and noise per replicate; all estimates."""
    config.validate()
    if config.n is None:
        raise HarnessConfigError("run_replications needs a single n (use mse_sweep for grids)")
    rule = build_sparsity(config.sparsity)
    rho = rule.rho(config.n)
    rows, aux = _run_grid_point(config, 0, config.n, rho)
    metadata = {
        "config": canonical_config(config),
        "fingerprint": config_fingerprint(config),
        "theory": _theory_metadata(config, config.n, rho),
        "columns": list(CSV_COLUMNS),
    }
    if aux:
        residuals = [v["balance_residual"] for v in aux.values() if "balance_residual" in v]
        if residuals:
            metadata["pc_balance_residual_max"] = max(residuals)
    return ResultTable(rows=rows, metadata=metadata, aux=aux)


@dataclass
class SweepResult:
    points: list  # tuples matching SWEEP_COLUMNS
    slopes: list  # tuples matching SLOPE_COLUMNS
    rows: list  # raw per-replicate rows (CSV_COLUMNS)
    metadata: dict

    def slope(self, estimator: str) -> float:
        for row in self.slopes:
            if row[0] == estimator:
                return row[2]
        raise KeyError(estimator)

    def write(self, csv_path: str):
        _write_csv(csv_path, SWEEP_COLUMNS, self.points)
        slope_path = csv_path[:-4] + ".slopes.csv" if csv_path.endswith(".csv") else csv_path + ".slopes.csv"
        _write_csv(slope_path, SLOPE_COLUMNS, self.slopes)
        _write_metadata(csv_path, self.metadata)


def mse_sweep(config: RunConfig) -> SweepResult:
    """MSE of each estimator against tau_IND over the n grid, with log-log slopes."""
    config.validate()
    if not config.n_grid:
        raise HarnessConfigError("mse_sweep needs a nonempty n_grid")
    rule = build_sparsity(config.sparsity)
    spec = build_graphon(config.graphon)
    model = build_outcome(config.outcome, pi=config.pi)
    pop = population_estimands(spec, model, config.pi)
    exponent = rule.exponent if rule.form == "power" else 0.0

    targets = {
        name: getattr(pop, ESTIMATOR_TARGETS.get(name, "tau_ind"))
        for name in config.estimators
    }
    all_rows, points = [], []
    per_estimator: dict[str, list[tuple[float, float]]] = {name: [] for name in config.estimators}
    for grid_index, n in enumerate(config.n_grid):
        rho = rule.rho(n)
        rows, _ = _run_grid_point(config, grid_index, n, rho)
        all_rows.extend(rows)
        for name in config.estimators:
            values = np.array([r[2] for r in rows if r[1] == name])
            errors = values - targets[name]
            mse = float(np.mean(errors**2))
            points.append(
                (n, rho, name, mse, float(errors.mean()), float(values.var()), len(values))
            )
            per_estimator[name].append((np.log(n), np.log(mse) if mse > 0 else -np.inf))

    slopes = []
    for name, pts in per_estimator.items():
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        if np.any(~np.isfinite(y)) or len(pts) < 2:
            slopes.append((name, exponent, float("nan"), float("nan"), float("nan")))
            continue
        slope, intercept, stderr = _ols_line(x, y)
        slopes.append((name, exponent, slope, intercept, stderr))

    metadata = {
        "config": canonical_config(config),
        "fingerprint": config_fingerprint(config),
        "target_tau_ind": pop.tau_ind,
        "targets": targets,
        "sparsity_exponent": exponent,
        "slopes": {row[0]: row[2] for row in slopes},
        "columns": list(SWEEP_COLUMNS),
    }
    return SweepResult(points=points, slopes=slopes, rows=all_rows, metadata=metadata)


def _ols_line(x: np.ndarray, y: np.ndarray):
    xc = x - x.mean()
    slope = float((xc @ (y - y.mean())) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    dof = max(len(x) - 2, 1)
    stderr = float(np.sqrt((resid @ resid) / dof / (xc @ xc)))
    return slope, intercept, stderr


HISTOGRAM_COLUMNS = ("bin_left", "bin_right", "count")


def histogram_export(table: ResultTable, estimator: str, bins: int = 30):
    """Binned counts plus the theory overlay block for one estimator."""
    values = table.estimates(estimator)
    if values.size == 0:
        raise ValueError(f"no rows for estimator {estimator!r}")
    counts, edges = np.histogram(values, bins=bins)
    rows = [
        (float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(len(counts))
    ]
    overlay = table.metadata.get("theory", {}).get("overlays", {}).get(estimator)
    metadata = {
        "estimator": estimator,
        "replicates": int(values.size),
        "fingerprint": table.metadata.get("fingerprint"),
        "overlay": overlay,
        "columns": list(HISTOGRAM_COLUMNS),
    }
    return rows, metadata


def write_histogram(table: ResultTable, estimator: str, csv_path: str, bins: int = 30):
    rows, metadata = histogram_export(table, estimator, bins=bins)
    _write_csv(csv_path, HISTOGRAM_COLUMNS, rows)
    _write_metadata(csv_path, metadata)
    return rows, metadata
