"""Data ingestion, semantic-label construction and the synthetic zero-shot generator.

All matrices are plain float64 numpy arrays; labels are dense 0-based int64
vectors.  CSV is the only on-disk format: comma separated, no header, '.'
decimal.  Values are written with 17 significant digits so a write/read cycle
reproduces every float bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "make_rng",
    "load_matrix",
    "load_labels",
    "load_attribute_table",
    "class_attributes_from_instances",
    "one_hot_attributes",
    "expand_semantic_labels",
    "ClassCenters",
    "compute_class_centers",
    "expand_centers",
    "SyntheticParams",
    "SyntheticDataset",
    "generate_synthetic_zero_shot",
    "format_float",
    "write_matrix",
    "write_labels",
    "write_key_values",
    "read_key_values",
    "write_report",
    "read_report",
    "read_csv_records",
    "export_synthetic",
]


class DataError(ValueError):
    """Raised for malformed input files or inconsistent array shapes."""


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Seeded PCG64 generator; ``stream`` integers select independent sub-streams."""
    if seed < 0:
        raise DataError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))


# ---------------------------------------------------------------------------
# file ingestion

def _read_lines(path) -> list[str]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    text = path.read_text()
    lines = text.splitlines()
    # tolerate trailing blank lines only
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataError(f"{path}: empty file")
    return lines


def load_matrix(path) -> np.ndarray:
    """Read a headerless numeric CSV into an ``(n, d)`` float array.

    Errors name the offending line (1-based) and column (1-based).
    """
    lines = _read_lines(path)
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(
                f"{path}: ragged row at line {lineno} "
                f"(expected {width} columns, got {len(cells)})"
            )
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell.strip()!r} at line {lineno}, column {col}"
                ) from None
            if not math.isfinite(v):
                raise DataError(
                    f"{path}: non-finite cell {cell.strip()!r} at line {lineno}, column {col}"
                )
            row.append(v)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def _check_labels(labels: np.ndarray, where: str = "labels") -> int:
    if labels.ndim != 1 or labels.size == 0:
        raise DataError(f"{where}: expected a non-empty 1-d label vector")
    if labels.min() < 0:
        raise DataError(f"{where}: negative class id {labels.min()}")
    c = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=c)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise DataError(f"{where}: class {empty[0]} has no members")
    return c


def load_labels(path) -> np.ndarray:
    """Read one non-negative integer class id per line.

    The class count is ``max + 1`` and every id below it must occur.
    """
    lines = _read_lines(path)
    out = []
    for lineno, line in enumerate(lines, start=1):
        tok = line.strip()
        try:
            v = int(tok)
        except ValueError:
            raise DataError(f"{path}: non-integer label {tok!r} at line {lineno}") from None
        if v < 0:
            raise DataError(f"{path}: negative label {v} at line {lineno}")
        out.append(v)
    labels = np.array(out, dtype=np.int64)
    _check_labels(labels, str(path))
    return labels


def load_attribute_table(path, c: int) -> np.ndarray:
    table = load_matrix(path)
    if table.shape[0] != c:
        raise DataError(f"{path}: expected {c} attribute rows (one per class), got {table.shape[0]}")
    return table


# ---------------------------------------------------------------------------
# semantic labels and class centers

def _as_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.dtype.kind not in "iu":
        raise DataError("labels must be integers")
    return labels.astype(np.int64, copy=False)


def class_attributes_from_instances(instance_attrs, labels) -> np.ndarray:
    """Average per-instance attribute rows into one row per class."""
    instance_attrs = np.asarray(instance_attrs, dtype=np.float64)
    labels = _as_labels(labels)
    if instance_attrs.ndim != 2 or instance_attrs.shape[0] != labels.shape[0]:
        raise DataError(
            f"instance attributes have {instance_attrs.shape[0] if instance_attrs.ndim else 0} rows "
            f"but there are {labels.shape[0]} labels"
        )
    c = _check_labels(labels)
    sums = np.zeros((c, instance_attrs.shape[1]))
    np.add.at(sums, labels, instance_attrs)
    return sums / np.bincount(labels, minlength=c)[:, None]


def one_hot_attributes(c: int) -> np.ndarray:
    """Identity attribute table: class-label supervision through the attribute pipeline."""
    return np.eye(c)


def expand_semantic_labels(labels, attrs) -> np.ndarray:
    """Row ``i`` of the result is ``attrs[labels[i]]`` (an exact copy)."""
    labels = _as_labels(labels)
    attrs = np.asarray(attrs, dtype=np.float64)
    c = _check_labels(labels)
    if attrs.ndim != 2 or attrs.shape[0] != c:
        raise DataError(f"labels describe {c} classes but the attribute table has {attrs.shape[0]} rows")
    return attrs[labels]


@dataclass(frozen=True)
class ClassCenters:
    centers: np.ndarray  # (c, d)
    counts: np.ndarray  # (c,)


def compute_class_centers(x, labels) -> ClassCenters:
    x = np.asarray(x, dtype=np.float64)
    labels = _as_labels(labels)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise DataError(f"x has {x.shape[0]} rows but there are {labels.shape[0]} labels")
    c = _check_labels(labels)
    counts = np.bincount(labels, minlength=c)
    sums = np.zeros((c, x.shape[1]))
    np.add.at(sums, labels, x)
    return ClassCenters(sums / counts[:, None], counts)


def expand_centers(centers: ClassCenters, labels) -> np.ndarray:
    """The ``(n, d)`` matrix whose row ``i`` is the center of instance ``i``'s class."""
    labels = _as_labels(labels)
    c = centers.centers.shape[0]
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise DataError(f"labels reference class {labels.max()} but only {c} centers exist")
    return centers.centers[labels]


# ---------------------------------------------------------------------------
# synthetic zero-shot data

@dataclass(frozen=True)
class SyntheticParams:
    n_seen: int = 300
    n_unseen: int = 200
    d: int = 60
    m: int = 8
    c_seen: int = 5
    c_unseen: int = 4
    k_info: int = 10
    attr_noise_sd: float = 0.0
    feature_noise_sd: float = 0.5

    def validate(self) -> None:
        for name in ("n_seen", "n_unseen", "d", "m", "k_info"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be >= 1")
        if self.c_seen < 2 or self.c_unseen < 2:
            raise DataError("c_seen and c_unseen must be >= 2")
        if self.k_info > self.d:
            raise DataError(f"k_info={self.k_info} exceeds d={self.d}")
        if self.n_seen < self.c_seen or self.n_unseen < self.c_unseen:
            raise DataError("every class needs at least one instance (n >= c per split)")
        if self.attr_noise_sd < 0 or self.feature_noise_sd < 0:
            raise DataError("noise levels must be non-negative")


@dataclass(frozen=True)
class SyntheticDataset:
    params: SyntheticParams
    seed: int
    seen_x: np.ndarray
    seen_labels: np.ndarray
    seen_attrs: np.ndarray
    unseen_x: np.ndarray
    unseen_labels: np.ndarray
    unseen_attrs: np.ndarray
    informative_features: np.ndarray
    class_attrs: np.ndarray = field(repr=False)  # clean (c_seen + c_unseen, m) rows
    generator: np.ndarray = field(repr=False)  # (m, k_info)
    seen_instance_attrs: np.ndarray = field(repr=False)
    unseen_instance_attrs: np.ndarray = field(repr=False)


def generate_synthetic_zero_shot(params: SyntheticParams, seed: int) -> SyntheticDataset:
    """Draw a seen/unseen dataset whose informative features are driven by attributes.

    Generative model, all draws from ``make_rng(seed)`` in this order:

    1. class attribute rows for the ``c_seen + c_unseen`` classes, i.i.d.
       N(0, 1); seen classes come first.
    2. a generator matrix ``G`` of shape ``(m, k_info)``, i.i.d. N(0, 1).
    3. the informative column positions, a uniformly random ``k_info``-subset
       of ``range(d)``.
    4. per split (seen, then unseen): instances are assigned to classes
       round-robin (``label = i % c``); each instance gets an attribute copy
       ``z_i = a[label] + attr_noise_sd * eps_i``; informative columns are
       ``z_i @ G + feature_noise_sd * eta_i``; every other column is
       N(0, sigma^2) noise where sigma^2 is the model variance of an average
       informative column, ``mean_j |G_j|^2 * (1 + attr_noise_sd^2) + feature_noise_sd^2``.

    The returned attribute tables are per-class means of the instance copies,
    which equal the clean rows when ``attr_noise_sd == 0``.
    """
    params.validate()
    p = params
    rng = make_rng(seed)
    class_attrs = rng.standard_normal((p.c_seen + p.c_unseen, p.m))
    gen = rng.standard_normal((p.m, p.k_info))
    informative = np.sort(rng.choice(p.d, size=p.k_info, replace=False)).astype(np.int64)
    noise_mask = np.ones(p.d, dtype=bool)
    noise_mask[informative] = False
    col_var = np.mean(np.sum(gen ** 2, axis=0)) * (1.0 + p.attr_noise_sd ** 2) + p.feature_noise_sd ** 2
    noise_sd = math.sqrt(col_var)

    def split(n, c, attr_rows):
        labels = np.arange(n, dtype=np.int64) % c
        z = attr_rows[labels] + p.attr_noise_sd * rng.standard_normal((n, p.m))
        x = np.empty((n, p.d))
        x[:, informative] = z @ gen + p.feature_noise_sd * rng.standard_normal((n, p.k_info))
        x[:, noise_mask] = noise_sd * rng.standard_normal((n, p.d - p.k_info))
        return x, labels, z

    sx, sl, sz = split(p.n_seen, p.c_seen, class_attrs[: p.c_seen])
    ux, ul, uz = split(p.n_unseen, p.c_unseen, class_attrs[p.c_seen:])
    return SyntheticDataset(
        params=p,
        seed=seed,
        seen_x=sx,
        seen_labels=sl,
        seen_attrs=class_attributes_from_instances(sz, sl),
        unseen_x=ux,
        unseen_labels=ul,
        unseen_attrs=class_attributes_from_instances(uz, ul),
        informative_features=informative,
        class_attrs=class_attrs,
        generator=gen,
        seen_instance_attrs=sz,
        unseen_instance_attrs=uz,
    )


# ---------------------------------------------------------------------------
# writers and report parsing

def format_float(v: float) -> str:
    return format(float(v), ".17g")


def write_matrix(path, values) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        for row in values:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_labels(path, labels) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(labels):
            fh.write(f"{int(v)}\n")


def _kv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(_kv_value(x.item() if isinstance(x, np.generic) else x) for x in v)
    return str(v)


def write_key_values(path, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={_kv_value(v)}\n")


def read_key_values(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise DataError(f"{path}: expected key=value at line {lineno}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_report(path, ranking, header: dict) -> None:
    """Ranking report: ``# key=value`` header lines, then one feature index per line."""
    with open(path, "w") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={_kv_value(v)}\n")
        for idx in ranking:
            fh.write(f"{int(idx)}\n")


def read_report(path) -> tuple[np.ndarray, dict[str, str]]:
    header = {}
    ranking = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            header[k] = v
            continue
        try:
            ranking.append(int(line))
        except ValueError:
            raise DataError(f"{path}: non-integer feature index {line!r} at line {lineno}") from None
    ranking = np.array(ranking, dtype=np.int64)
    if ranking.size and np.unique(ranking).size != ranking.size:
        raise DataError(f"{path}: duplicate feature index in ranking")
    return ranking, header


def read_csv_records(path) -> list[dict[str, str]]:
    """Parse one of the headered CSV outputs (trace, sweep, compare)."""
    import csv

    lines = _read_lines(path)
    reader = csv.DictReader(lines)
    rows = list(reader)
    for lineno, row in enumerate(rows, start=2):
        if None in row or any(v is None for v in row.values()):
            raise DataError(f"{path}: ragged row at line {lineno}")
    return rows


SYNTH_FILES = (
    "seen_features.csv",
    "seen_labels.txt",
    "seen_attrs.csv",
    "unseen_features.csv",
    "unseen_labels.txt",
    "unseen_attrs.csv",
    "manifest.txt",
)


def export_synthetic(ds: SyntheticDataset, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    paths = [out_dir / name for name in SYNTH_FILES]
    write_matrix(paths[0], ds.seen_x)
    write_labels(paths[1], ds.seen_labels)
    write_matrix(paths[2], ds.seen_attrs)
    write_matrix(paths[3], ds.unseen_x)
    write_labels(paths[4], ds.unseen_labels)
    write_matrix(paths[5], ds.unseen_attrs)
    manifest = {"seed": ds.seed}
    manifest.update({k: getattr(ds.params, k) for k in ds.params.__dataclass_fields__})
    manifest["informative_features"] = list(ds.informative_features)
    write_key_values(paths[6], manifest)
    return paths
