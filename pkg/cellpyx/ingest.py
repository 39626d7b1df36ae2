"""
Reading and writing test corpora: a manifest JSON lists the datasets and the
cell, and each dataset is a CSV with the columns

    time_s,current_a,voltage_v,temperature_c

(current positive in discharge). Ingestion validates every file and loads the
valid ones; a malformed file is skipped and reported, a malformed manifest is fatal.
Input files are only read.

Manifest format:

    {"schema_version": 1,
     "cell": {"capacity_Ah": 166.0, "v_min_V": 2.5, "v_max_V": 3.65},
     "datasets": [{"id": "cc1_25C", "file": "cc1_25C.csv", "role": "calibration",
                   "ambient_temp_C": 25.0, "profile_kind": "constant-rate", "initial_soc": 0.95}, ...]}

File paths are relative to the manifest's directory.

Programmer: cellpyx team
Since: 2024-05
"""

import json
import pathlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd

from cellpyx.cells import CellSpec
from cellpyx.parameters import check_schema_version
from cellpyx.timeseries import TimeSeries, Dataset, CSV_COLUMNS, ROLES, PROFILE_KINDS

import logging
logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class ManifestEntry(NamedTuple):
    id: str
    file: pathlib.Path
    role: str
    ambient_temp: float
    profile_kind: str
    initial_soc: float = None

    def to_dict(self, base_dir:pathlib.Path) -> dict:
        data = {
            "id": self.id, "file": str(self.file.relative_to(base_dir)) if self.file.is_relative_to(base_dir) else str(self.file),
            "role": self.role, "ambient_temp_C": self.ambient_temp, "profile_kind": self.profile_kind,
        }
        if self.initial_soc is not None:
            data["initial_soc"] = self.initial_soc
        return data


@dataclass
class Manifest:
    entries: list
    spec: CellSpec
    base_dir: pathlib.Path
    schema_version: int = 1

    def __post_init__(self):
        ids = [entry.id for entry in self.entries]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"manifest: duplicate dataset ids {duplicates}.")
        for entry in self.entries:
            if entry.role not in ROLES:
                raise ValueError(f"manifest: {entry.id}: role must be one of {ROLES}, got {entry.role!r}.")
            if entry.profile_kind not in PROFILE_KINDS:
                raise ValueError(f"manifest: {entry.id}: profile kind must be one of {PROFILE_KINDS}, got {entry.profile_kind!r}.")

    @property
    def role_counts(self) -> dict:
        return {role: sum(entry.role == role for entry in self.entries) for role in ROLES}

    @staticmethod
    def from_dict(data:dict, base_dir, title:str="manifest") -> "Manifest":
        check_schema_version(data, title)
        base_dir = pathlib.Path(base_dir)
        try:
            spec = CellSpec.from_dict(data["cell"])
            entries = []
            for item in data["datasets"]:
                path = base_dir / item["file"]
                if not path.is_file():
                    raise ValueError(f"{title}: {item['id']}: file {path} not found.")
                initial_soc = item.get("initial_soc")
                entries.append(ManifestEntry(
                    id=str(item["id"]), file=path, role=item["role"], ambient_temp=float(item["ambient_temp_C"]),
                    profile_kind=item["profile_kind"], initial_soc=None if initial_soc is None else float(initial_soc)))
        except KeyError as err:
            raise ValueError(f"{title}: missing field {err}.") from err
        return Manifest(entries, spec, base_dir)

    @staticmethod
    def load(path) -> "Manifest":
        path = pathlib.Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}: not valid JSON: {err}") from err
        return Manifest.from_dict(data, path.parent, title=str(path))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "cell": self.spec.to_dict(),
            "datasets": [entry.to_dict(self.base_dir) for entry in self.entries],
        }

    def save(self, path):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))


class IngestError(NamedTuple):
    dataset_id: str
    file: str
    reason: str
    row: int = None     # data row (0 = first row after the header), when it applies


@dataclass
class IngestResult:
    datasets: list
    errors: list
    manifest: Manifest
    role_counts: dict = field(default_factory=dict)

    @property
    def spec(self) -> CellSpec:
        return self.manifest.spec

    def error_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.errors, columns=list(IngestError._fields))


class _RowError(ValueError):
    def __init__(self, title:str, reason:str, row:int):
        super().__init__(f"{title}: {reason} at row {row}")
        self.reason = reason
        self.row = row


def read_series_csv(path, title:str=None) -> TimeSeries:
    """
    Read and validate one data file. Raises ValueError on the first violation;
    its `row` attribute, when present, is the offending data row.
    """
    path = pathlib.Path(path)
    title = title or path.stem
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
        raise ValueError(f"{title}: unreadable CSV: {err}") from err
    missing = [column for column in CSV_COLUMNS if column not in frame.columns]
    if missing:
        raise ValueError(f"{title}: header lacks the columns {missing}.")
    values = frame[list(CSV_COLUMNS)].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    finite = np.isfinite(values).all(axis=1)
    if not finite.all():
        raise _RowError(title, "non-finite value", int(np.argmin(finite)))
    steps = np.diff(values[:,0])
    if not np.all(steps > 0):
        raise _RowError(title, "non-monotone time", int(np.argmax(steps <= 0)) + 1)
    return TimeSeries(time=values[:,0], current=values[:,1], temperature=values[:,3], voltage=values[:,2], title=title)


def ingest(manifest_path) -> IngestResult:
    """
    Load every dataset of a manifest. Invalid files are skipped and listed in
    the result's errors.
    """
    manifest = Manifest.load(manifest_path)
    datasets, errors = [], []
    for entry in manifest.entries:
        try:
            series = read_series_csv(entry.file, title=entry.id)
            datasets.append(Dataset(entry.id, entry.role, entry.ambient_temp, entry.profile_kind, series, entry.initial_soc))
        except _RowError as err:
            errors.append(IngestError(entry.id, str(entry.file), err.reason, err.row))
        except ValueError as err:
            errors.append(IngestError(entry.id, str(entry.file), str(err)))
    for error in errors:
        logger.warning("%s rejected: %s%s", error.dataset_id, error.reason, "" if error.row is None else f" (row {error.row})")
    role_counts = {role: sum(dataset.role == role for dataset in datasets) for role in ROLES}
    logger.info("Ingested %d datasets (%s), %d rejected",
                len(datasets), ", ".join(f"{n} {role}" for role,n in role_counts.items()), len(errors))
    return IngestResult(datasets, errors, manifest, role_counts)


def write_series_csv(series:TimeSeries, path):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    series.to_frame().to_csv(path, index=False, float_format="%.9g")


def write_corpus(datasets:list, spec:CellSpec, directory) -> pathlib.Path:
    """ Write each dataset as `<id>.csv` and a manifest listing them; returns the manifest path. """
    directory = pathlib.Path(directory)
    entries = []
    for dataset in datasets:
        path = directory / f"{dataset.id}.csv"
        write_series_csv(dataset.series, path)
        entries.append(ManifestEntry(dataset.id, path, dataset.role, dataset.ambient_temp, dataset.profile_kind, dataset.initial_soc))
    manifest_path = directory / MANIFEST_NAME
    Manifest(entries, spec, directory).save(manifest_path)
    return manifest_path


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
