"""Dataset ingestion: CSV parsing, min-max normalization, stratified splits.

Feature values are normalized per column to [0, 1]; labels are remapped to
dense 0..C-1 with the original names recorded.  Rows with missing or
unparseable cells are dropped and counted rather than imputed.  The six
benchmark tables are not vendored: `fetch` pulls them from the public UCI
repository per the bundled manifest, and tests fall back to synthetic
fixtures with matching shapes when no download is cached.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import urllib.request
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

MISSING_TOKENS = {"", "?", "na", "nan", "none"}


@dataclass(frozen=True)
class CsvSchema:
    label_column: int | str = -1
    delimiter: str | None = ","  # None: split on any whitespace
    header: bool = False
    drop_columns: tuple[int, ...] = ()


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray  # (S, F) float64 in [0, 1]
    labels: np.ndarray  # (S,) int64 in [0, C)
    feature_mins: np.ndarray
    feature_maxes: np.ndarray
    label_names: tuple[str, ...]
    dropped_rows: int = 0
    constant_features: tuple[int, ...] = ()

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    test: np.ndarray
    seed: int


def load_csv(path, schema: CsvSchema = CsvSchema(), name: str | None = None) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        if schema.delimiter is None:
            rows = [line.split() for line in fh if line.strip()]
        else:
            rows = [r for r in csv.reader(fh, delimiter=schema.delimiter) if r]

    header = None
    if schema.header:
        if not rows:
            raise ValueError(f"{path}: empty file")
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    n_cols = len(rows[0])
    if isinstance(schema.label_column, str):
        if header is None:
            raise ValueError(f"label column {schema.label_column!r} needs a header row")
        try:
            label_idx = header.index(schema.label_column)
        except ValueError:
            raise ValueError(f"label column {schema.label_column!r} not in header {header}") from None
    else:
        label_idx = schema.label_column % n_cols
    drop = {c % n_cols for c in schema.drop_columns}
    feature_idx = [c for c in range(n_cols) if c != label_idx and c not in drop]
    if not feature_idx:
        raise ValueError(f"{path}: no feature columns left")

    feats, labels_raw = [], []
    dropped = 0
    for row in rows:
        if len(row) != n_cols:
            dropped += 1
            continue
        cells = [c.strip() for c in row]
        if any(cells[c].lower() in MISSING_TOKENS for c in feature_idx + [label_idx]):
            dropped += 1
            continue
        try:
            feats.append([float(cells[c]) for c in feature_idx])
        except ValueError:
            dropped += 1
            continue
        labels_raw.append(cells[label_idx])

    if not feats:
        raise ValueError(f"{path}: zero usable rows ({dropped} dropped)")
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} row(s) with missing/unparseable cells")

    x = np.asarray(feats, dtype=np.float64)
    names = tuple(sorted(set(labels_raw)))
    if len(names) < 2:
        raise ValueError(f"{path}: need at least 2 classes, found {names}")
    mapping = {n: i for i, n in enumerate(names)}
    y = np.asarray([mapping[v] for v in labels_raw], dtype=np.int64)

    mins = x.min(axis=0)
    maxes = x.max(axis=0)
    span = maxes - mins
    constant = tuple(int(i) for i in np.flatnonzero(span == 0))
    if constant:
        warnings.warn(f"{path}: constant feature column(s) {constant} normalized to 0")
    safe_span = np.where(span == 0, 1.0, span)
    x = (x - mins) / safe_span
    x[:, list(constant)] = 0.0

    return Dataset(
        name=name or path.stem,
        features=x,
        labels=y,
        feature_mins=mins,
        feature_maxes=maxes,
        label_names=names,
        dropped_rows=dropped,
        constant_features=constant,
    )


def stratified_split(ds: Dataset, train_frac: float = 0.7, seed: int = 0) -> Split:
    """Per-class shuffled allocation; train size is exactly round(frac * S).

    Largest-remainder apportionment keeps each class within one sample of
    its global proportion.
    """
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must leave both splits non-empty, got {train_frac}")
    s = ds.n_samples
    target = int(round(train_frac * s))
    if target == 0 or target == s:
        raise ValueError(f"train_frac {train_frac} gives an empty split for {s} samples")

    rng = np.random.default_rng(seed)
    class_indices = {}
    for c in range(ds.n_classes):
        idx = np.flatnonzero(ds.labels == c)
        if len(idx) < 2:
            raise ValueError(f"class {ds.label_names[c]!r} has {len(idx)} sample(s); need >= 2")
        class_indices[c] = rng.permutation(idx)

    quotas = {c: train_frac * len(class_indices[c]) for c in class_indices}
    take = {c: int(np.floor(q)) for c, q in quotas.items()}
    leftover = target - sum(take.values())
    by_remainder = sorted(quotas, key=lambda c: (-(quotas[c] - take[c]), c))
    for c in by_remainder[:leftover]:
        take[c] += 1

    train, test = [], []
    for c, idx in class_indices.items():
        train.extend(idx[: take[c]])
        test.extend(idx[take[c] :])
    return Split(
        train=np.sort(np.asarray(train, dtype=np.int64)),
        test=np.sort(np.asarray(test, dtype=np.int64)),
        seed=seed,
    )


# --------------------------------------------------------------------------
# benchmark manifest + fetch

def load_manifest() -> dict:
    with resources.files("adcprune").joinpath("datasets.json").open() as fh:
        return json.load(fh)


def cache_root() -> Path:
    root = os.environ.get("ADCPRUNE_CACHE")
    if root:
        return Path(root)
    return Path.home() / ".cache" / "adcprune"


def schema_from_manifest(entry: dict) -> CsvSchema:
    return CsvSchema(
        label_column=entry.get("label_column", -1),
        delimiter=entry.get("delimiter", ","),
        header=entry.get("header", False),
        drop_columns=tuple(entry.get("drop_columns", ())),
    )


def fetch(name: str, dest: Path | None = None) -> Path:
    """Download one manifest dataset, verifying or recording its sha256.

    With no checksum pinned in the manifest the digest of the first download
    is written next to the file and enforced on later fetches.
    """
    manifest = load_manifest()
    if name not in manifest:
        raise KeyError(f"unknown dataset {name!r}; manifest has {sorted(manifest)}")
    entry = manifest[name]
    root = Path(dest) if dest else cache_root()
    root.mkdir(parents=True, exist_ok=True)
    target = root / entry["file"]
    digest_file = target.with_suffix(target.suffix + ".sha256")

    if not target.exists():
        with urllib.request.urlopen(entry["url"], timeout=60) as resp:
            payload = resp.read()
        if "archive" in entry:
            import io
            import zipfile

            with zipfile.ZipFile(io.BytesIO(payload)) as zf:
                member = next(m for m in zf.namelist() if m.endswith(entry["file"]))
                target.write_bytes(zf.read(member))
        else:
            target.write_bytes(payload)
    digest = hashlib.sha256(target.read_bytes()).hexdigest()

    pinned = entry.get("sha256")
    if pinned is None and digest_file.exists():
        pinned = digest_file.read_text().strip()
    if pinned is not None:
        if digest != pinned:
            raise ValueError(f"{target}: sha256 {digest} does not match recorded {pinned}")
    else:
        digest_file.write_text(digest + "\n")
    return target


def load_named(name: str, root: Path | None = None) -> Dataset:
    """Load a manifest dataset from the cache (fetching if necessary)."""
    manifest = load_manifest()
    if name not in manifest:
        raise KeyError(f"unknown dataset {name!r}; manifest has {sorted(manifest)}")
    entry = manifest[name]
    base = Path(root) if root else cache_root()
    target = base / entry["file"]
    if not target.exists():
        target = fetch(name, base)
    if target.suffix == ".xls":
        converted = target.with_suffix(".csv")
        if not converted.exists():
            raise ValueError(f"{target}: {entry.get('note', 'needs conversion to CSV')}")
        target = converted
    return load_csv(target, schema_from_manifest(entry), name=name)
