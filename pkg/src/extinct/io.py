"""File formats: distribution/chain JSON, sample-set CSV with JSON sidecar,
comparison reports, and the experiment config block embedded in every output.

Sample CSV layout: header ``trial,tau,extinct_state,censored`` and one row
per trial; the sidecar ``<name>.meta.json`` carries params, seed, source and
the resolved command configuration.  All CSV files use '.' decimals and a
mandatory header row.  Floats are serialized with repr, which round-trips
binary64 exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .dist import Distribution
from .errors import SchemaMismatch, ValidationError
from .law import LawParams
from .markov import MarkovChain
from .sim import ExtinctionRecord, ExtinctionSampleSet

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    """Resolved command parameters; embedded in outputs so any file can be
    regenerated.  Unknown JSON fields are rejected on load."""

    command: str
    schema_version: int = SCHEMA_VERSION
    m: int | None = None
    n_samples: int | None = None
    entropy: float | None = None
    seed: int | None = None
    trials: int | None = None
    runs: int | None = None
    dt: float | None = None
    substeps: int | None = None
    max_steps: int | None = None
    max_cycles: int | None = None
    threads: int | None = None
    tol: float | None = None
    dist_path: str | None = None
    samples_path: str | None = None
    samples_b_path: str | None = None
    out: str | None = None
    m_list: list[int] | None = None
    n_list: list[int] | None = None
    dists_per_cell: int | None = None
    trials_per_dist: int | None = None
    taus: list[float] | None = None
    quantiles: list[float] | None = None
    mean: bool | None = None
    force: bool | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise SchemaMismatch(f"unknown config fields: {sorted(unknown)}")
        if d.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"unsupported schema_version {d.get('schema_version')}")
        return cls(**d)


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_distribution(path, dist: Distribution):
    write_json(path, dist.to_dict())


def read_distribution(path) -> Distribution:
    return Distribution.from_dict(read_json(path))


def write_chain(path, chain: MarkovChain):
    write_json(path, chain.to_dict())


def read_chain(path) -> MarkovChain:
    return MarkovChain.from_dict(read_json(path))


def sidecar_path(csv_path) -> Path:
    return Path(str(csv_path) + ".meta.json")


def write_sample_set(path, samples: ExtinctionSampleSet,
                     config: ExperimentConfig | None = None):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "tau", "extinct_state", "censored"])
        for r in samples.records:
            writer.writerow([r.trial_index, repr(float(r.tau)),
                             r.extinct_state, int(r.censored)])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "source": samples.source,
        "seed": samples.seed,
        "params": {
            "n_samples": samples.params.n_samples,
            "dist": samples.params.dist.to_dict(),
        },
    }
    if config is not None:
        meta["config"] = config.to_dict()
    write_json(sidecar_path(path), meta)


def read_sample_set(path) -> ExtinctionSampleSet:
    path = Path(path)
    meta = read_json(sidecar_path(path))
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported sample schema in {sidecar_path(path)}")
    params = LawParams(Distribution.from_dict(meta["params"]["dist"]),
                       int(meta["params"]["n_samples"]))
    records = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"trial", "tau", "extinct_state", "censored"}
        if reader.fieldnames is None or need - set(reader.fieldnames):
            raise SchemaMismatch(f"sample CSV {path} missing columns "
                                 f"{sorted(need - set(reader.fieldnames or []))}")
        for row in reader:
            records.append(ExtinctionRecord(
                float(row["tau"]), int(row["extinct_state"]), int(row["trial"]),
                meta["source"], censored=bool(int(row["censored"]))))
    return ExtinctionSampleSet(tuple(records), params, int(meta["seed"]),
                               meta["source"])


def write_table(path, header: list[str], rows: list[list],
                config: ExperimentConfig | None = None):
    """Generic CSV with an optional config sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                             else v for v in row])
    if config is not None:
        write_json(sidecar_path(path), {"schema_version": SCHEMA_VERSION,
                                        "config": config.to_dict()})


def comparison_report(ks, sim_summary, theory_mean: float | None,
                      z: float | None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "d_stat": ks.d_stat,
        "p_value": ks.p_value,
        "n_eff": ks.n_eff,
        "mode": ks.mode,
        "sim_summary": sim_summary.to_dict(),
        "theory_mean": theory_mean,
        "z": z,
    }
