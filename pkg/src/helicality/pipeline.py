"""End-to-end scoring of a corpus, one record per group."""
from __future__ import annotations

import datetime as _dt
import hashlib
import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._backend import BACKEND
from .correlation import (
    DEFAULT_RHO_FLOOR,
    chroma_consistent_drop,
    pearson_squared,
    rho_to_distance,
    zero_variance_rows,
)
from .cqt import (
    CqtParams,
    FeatureMatrix,
    loudest_frame_vectors,
    read_features_csv,
    read_manifest,
    select_octaves,
)
from .errors import ConfigError, DataError, DisconnectedGraph, HelicalityError
from .helix import HelixFit, chroma_of, fit_helix
from .isomap import Embedding, NeighborGraph, classical_mds, geodesic_distances, knn_graph

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_GROUP = "all"


@dataclass
class PipelineConfig:
    manifest: str | None = None
    features: str | None = None
    q: int = 24
    j: int = 3
    knn: int = 3
    f_min: float = 32.703
    sample_rate: int = 22050
    hop: int = 512
    n_octaves_computed: int = 8
    rho_floor: float = DEFAULT_RHO_FLOOR
    disconnect_policy: str = "fail"
    group_by: str | None = None
    group_name: str = DEFAULT_GROUP
    shared_window: bool = False
    drop_zero_variance: bool = False
    on_file_error: str = "fail"
    keep_going: bool = False
    jobs: int = 1
    output_dir: str | None = None
    dump_intermediates: bool = False
    svg: bool = False

    def validate(self):
        if (self.manifest is None) == (self.features is None):
            raise ConfigError("exactly one of manifest or features must be given")
        src = self.manifest or self.features
        if not os.path.exists(src):
            raise ConfigError(f"input {src} does not exist")
        if self.q < 1 or self.j < 1:
            raise ConfigError("q and j must be positive")
        if self.knn < 1:
            raise ConfigError("knn must be positive")
        if not 0.0 < self.rho_floor < 1.0:
            raise ConfigError("rho_floor must lie in (0, 1)")
        if self.disconnect_policy not in ("fail", "largest-component"):
            raise ConfigError(f"unknown disconnect policy {self.disconnect_policy!r}")
        if self.on_file_error not in ("fail", "skip"):
            raise ConfigError(f"unknown file error policy {self.on_file_error!r}")
        if self.j > self.n_octaves_computed:
            raise ConfigError("cannot keep more octaves than are computed")
        self.cqt_params()

    def cqt_params(self) -> CqtParams:
        try:
            return CqtParams(self.q, self.n_octaves_computed, self.f_min, self.hop, self.sample_rate)
        except HelicalityError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        """Config as recorded in the report; the output location is left out."""
        out = asdict(self)
        out.pop("output_dir")
        out.pop("jobs")
        return out


@dataclass
class GroupArtifacts:
    features: FeatureMatrix
    rho2: np.ndarray
    distance: np.ndarray
    graph: NeighborGraph
    geodesic: np.ndarray
    embedding: Embedding
    fit: HelixFit
    kept_rows: np.ndarray


@dataclass
class HelicalityReport:
    config: dict
    groups: list
    tool_version: str = __version__
    backend: str = BACKEND
    input_hash: str = ""
    schema_version: int = SCHEMA_VERSION
    generated_at: str = ""
    warnings: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict, compare=False, repr=False)


def _largest_component(comps):
    return max(comps, key=lambda c: (len(c), -c[0]))


def score_features(fm: FeatureMatrix, config: PipelineConfig, group: str = DEFAULT_GROUP):
    """Run correlation -> Isomap -> helix fit on one feature matrix.

    Returns ``(record, artifacts)``.
    """
    q = config.q
    x = np.asarray(fm.data, dtype=np.float64)
    n_rows = x.shape[0]
    if n_rows % q:
        raise DataError(f"feature matrix has {n_rows} rows, not a multiple of Q={q}")
    n_oct = n_rows // q
    kept = np.arange(n_rows)
    dropped = []
    if config.drop_zero_variance:
        bad = zero_variance_rows(x)
        if bad.size:
            drop = chroma_consistent_drop(bad, n_rows, q)
            kept = np.setdiff1d(kept, drop)
            dropped.extend(int(r) for r in drop)
            logger.warning("group %s: dropped %d zero-variance bins", group, drop.size)
    rho2 = pearson_squared(x[kept]).rho2
    dist = rho_to_distance(rho2, config.rho_floor).d
    k = min(config.knn, len(kept) - 1)
    graph = knn_graph(dist, k)
    try:
        geo = geodesic_distances(graph).d
    except DisconnectedGraph as exc:
        if config.disconnect_policy != "largest-component":
            raise
        comp = np.array(_largest_component(exc.components))
        lost = np.setdiff1d(np.arange(len(kept)), comp)
        dropped.extend(int(kept[i]) for i in lost)
        logger.warning("group %s: graph disconnected, keeping %d of %d bins", group, comp.size, len(kept))
        remap = {int(old): new for new, old in enumerate(comp)}
        sub_edges = {
            (remap[u], remap[v]): w for (u, v), w in graph.edges.items() if u in remap and v in remap
        }
        geo = geodesic_distances(NeighborGraph(comp.size, sub_edges)).d
        kept = kept[comp]
        rho2 = rho2[np.ix_(comp, comp)]
        dist = dist[np.ix_(comp, comp)]
        graph = NeighborGraph(comp.size, sub_edges)
    emb = classical_mds(geo, 3, q, n_oct, bin_index=kept + 1)
    fit = fit_helix(emb)
    c = fit.circle
    record = {
        "group": group,
        "n_files": int(fm.n_files),
        "P": int(len(kept)),
        "bin_offset": int(fm.bin_offset),
        "helicality": float(fit.score.h),
        "mse": float(fit.score.mse),
        "circle": {
            "center": [float(v) for v in c.center],
            "initial_center": [float(v) for v in c.initial_center],
            "radius": float(c.radius),
            "objective": float(c.objective_value),
            "initial_objective": float(c.initial_value),
            "iterations": int(c.iterations),
            "duality_gap": float(c.duality_gap),
        },
        "line": {"a": float(fit.line.slope), "b": float(fit.line.intercept)},
        "phase": float(fit.model.phase),
        "winding": int(fit.model.winding),
        "eigenvalues": [float(v) for v in emb.eigenvalues],
        "residuals": [float(v) for v in fit.score.residuals],
        "dropped_bins": sorted(dropped),
    }
    arts = GroupArtifacts(fm, rho2, dist, graph, geo, emb, fit, kept)
    return record, arts


def _hash_inputs(config: PipelineConfig, paths) -> str:
    h = hashlib.sha256()
    for p in [config.manifest or config.features, *paths]:
        with open(p, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return "sha256:" + h.hexdigest()


def _group_plan(config: PipelineConfig):
    entries = read_manifest(config.manifest)
    if not entries:
        raise DataError(f"{config.manifest}: manifest is empty")
    groups: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        if config.group_by:
            if config.group_by not in e.fields:
                raise ConfigError(f"manifest has no column {config.group_by!r}")
            key = e.fields[config.group_by]
        else:
            key = DEFAULT_GROUP
        groups.setdefault(key, []).append(i)
    return entries, groups


def run_pipeline(config: PipelineConfig) -> HelicalityReport:
    """Score every group of the configured corpus.

    Raises the first group's error unless ``config.keep_going`` is set, in
    which case failing groups are recorded with their error and skipped.
    """
    config.validate()
    params = config.cqt_params()
    records, artifacts, warnings = [], {}, []

    def attempt(name, fn):
        try:
            rec, art = fn()
        except HelicalityError as exc:
            if not config.keep_going:
                if not str(exc).startswith(f"group {name}"):
                    exc.args = (f"group {name}: {exc}",)
                raise
            logger.warning("group %s failed: %s", name, exc)
            records.append({"group": name, "error": str(exc), "error_type": type(exc).__name__})
            return
        records.append(rec)
        artifacts[name] = art

    if config.features:
        fm = read_features_csv(config.features, params)
        input_hash = _hash_inputs(config, [])
        attempt(config.group_name, lambda: score_features(fm, config, config.group_name))
    else:
        entries, groups = _group_plan(config)
        paths = [e.path for e in entries]
        for p in paths:
            if not os.path.exists(p) and config.on_file_error == "fail":
                raise DataError(f"{p}: file not found")
        input_hash = _hash_inputs(config, [p for p in paths if os.path.exists(p)])
        stack, kept_paths, file_warnings = loudest_frame_vectors(
            paths, params, config.on_file_error, config.jobs
        )
        warnings.extend(file_warnings)
        col_of = {p: i for i, p in enumerate(kept_paths)}
        shared = None
        if config.shared_window:
            shared = select_octaves(stack, config.j, params, kept_paths)

        def group_features(members):
            cols = [col_of[paths[i]] for i in members if paths[i] in col_of]
            if len(cols) < 2:
                raise DataError(f"fewer than two usable files ({len(cols)})")
            ids = [kept_paths[c] for c in cols]
            if shared is not None:
                return FeatureMatrix(shared.data[:, cols], shared.bin_offset, params, ids)
            return select_octaves(stack[:, cols], config.j, params, ids)

        for name, members in groups.items():
            attempt(name, lambda m=members, n=name: score_features(group_features(m), config, n))

    return HelicalityReport(
        config=config.echo(),
        groups=records,
        input_hash=input_hash,
        generated_at=_dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat(),
        warnings=warnings,
        artifacts=artifacts,
    )


def embedding_table(art: GroupArtifacts):
    """Rows of ``bin_index, freq_hz, chroma, e1, e2, e3`` for the embedding dump."""
    emb = art.embedding
    q = emb.bins_per_octave
    freqs = art.features.frequencies()[art.kept_rows]
    chroma = chroma_of(emb.bin_index, q)
    return [
        (int(b), float(f), int(c), *(float(v) for v in row))
        for b, f, c, row in zip(emb.bin_index, freqs, chroma, emb.coords)
    ]
