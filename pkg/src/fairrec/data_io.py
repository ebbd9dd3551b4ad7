"""Reading relevance data, synthetic instances, and writing reports.

Input formats
-------------
Relevance triples, UTF-8 with header::

    customer_id,producer_id,score

Pairs that never appear score 0.  Customer and producer indices follow
first appearance order in the file.

Geo data for the rating-over-distance relevance, two files::

    producer_id,rating,lat,lon
    customer_id,lat,lon

Outputs
-------
Report CSV columns: ``strategy,k,alpha,seed,H,Z,L,Y,mu_phi,std_phi``.
Floats are written with 6 significant digits.  JSON output uses the same
field names.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from fairrec import rng as _rng
from fairrec.metrics import REPORT_COLUMNS, FairnessReport
from fairrec.model import FairRecError, Instance

EARTH_RADIUS_KM = 6371.0
MIN_DISTANCE_KM = 0.1


class ParseError(FairRecError):
    pass


class NegativeScore(FairRecError):
    pass


class DuplicatePair(FairRecError):
    pass


class MissingCoordinate(FairRecError):
    pass


@dataclass
class DatasetManifest:
    kind: str
    source: str
    customers: list[str] = field(default_factory=list)
    producers: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def customer_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.customers)}

    def producer_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.producers)}


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    popularity: str = "zipf"
    exponent: float = 1.1
    noise: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise FairRecError(f"synthetic instance needs m, n >= 1, got m={self.m}, n={self.n}")
        if self.popularity not in ("zipf", "uniform"):
            raise FairRecError(f"unknown popularity model {self.popularity!r}")
        if self.popularity == "zipf" and not self.exponent > 0:
            raise FairRecError(f"zipf exponent must be positive, got {self.exponent}")
        if self.noise < 0:
            raise FairRecError(f"noise scale must be nonnegative, got {self.noise}")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    if x is None:
        return ""
    return str(x)


# -- input -----------------------------------------------------------------


def load_relevance_csv(path: str | Path) -> tuple[Instance, DatasetManifest]:
    path = Path(path)
    customers: dict[str, int] = {}
    producers: dict[str, int] = {}
    triples: dict[tuple[int, int], float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["customer_id", "producer_id", "score"]:
            raise ParseError(f"{path}:1: expected header customer_id,producer_id,score, got {header}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{line}: expected 3 fields, got {len(row)}")
            cid, pid, raw = (c.strip() for c in row)
            try:
                score = float(raw)
            except ValueError:
                raise ParseError(f"{path}:{line}: score {raw!r} is not a number") from None
            if not math.isfinite(score):
                raise ParseError(f"{path}:{line}: score {raw!r} is not finite")
            if score < 0:
                raise NegativeScore(f"{path}:{line}: negative score {score}")
            u = customers.setdefault(cid, len(customers))
            p = producers.setdefault(pid, len(producers))
            if (u, p) in triples:
                raise DuplicatePair(f"{path}:{line}: duplicate pair ({cid}, {pid})")
            triples[(u, p)] = score
    if not triples:
        raise ParseError(f"{path}: no data rows")
    V = np.zeros((len(customers), len(producers)))
    for (u, p), s in triples.items():
        V[u, p] = s
    manifest = DatasetManifest("dense-matrix", str(path), list(customers), list(producers))
    return Instance(V), manifest


def write_relevance_csv(inst: Instance, path: str | Path, manifest: DatasetManifest | None = None) -> None:
    """Write every entry (zeros included) as triples, using ``repr`` for exact floats."""
    cust = manifest.customers if manifest else [str(u) for u in range(inst.m)]
    prod = manifest.producers if manifest else [str(p) for p in range(inst.n)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["customer_id", "producer_id", "score"])
        for u in range(inst.m):
            row = inst.relevance[u]
            for p in range(inst.n):
                w.writerow([cust[u], prod[p], repr(float(row[p]))])


def haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(a, dtype=np.float64)) for a in (lat1, lon1, lat2, lon2))
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def build_gl_custom(ratings: Sequence[float], producer_coords, customer_coords) -> Instance:
    """Relevance = producer rating / distance in km.

    Coordinates are ``(lat, lon)`` degrees.  Distances below 0.1 km are
    clamped to 0.1 km.
    """
    ratings = np.asarray(ratings, dtype=np.float64)
    pc = np.asarray(producer_coords, dtype=np.float64).reshape(-1, 2)
    cc = np.asarray(customer_coords, dtype=np.float64).reshape(-1, 2)
    if len(pc) != len(ratings):
        raise MissingCoordinate(f"{len(ratings)} ratings but {len(pc)} producer coordinates")
    for name, arr in (("producer", pc), ("customer", cc)):
        bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
        if bad.size:
            raise MissingCoordinate(f"{name} {bad[0]} has no usable coordinate")
    if (ratings < 0).any() or not np.isfinite(ratings).all():
        raise NegativeScore("ratings must be finite and nonnegative")
    d = haversine_km(cc[:, None, 0], cc[:, None, 1], pc[None, :, 0], pc[None, :, 1])
    d = np.maximum(d, MIN_DISTANCE_KM)
    return Instance(ratings[None, :] / d)


def _read_rows(path: Path, header: list[str]) -> list[tuple[int, list[str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got is None or [h.strip() for h in got] != header:
            raise ParseError(f"{path}:1: expected header {','.join(header)}, got {got}")
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            rows.append((line, [c.strip() for c in row]))
    return rows


def _coord(path, line, raw) -> float:
    if raw == "":
        raise MissingCoordinate(f"{path}:{line}: missing coordinate")
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"{path}:{line}: {raw!r} is not a number") from None


def load_geo_csv(producers_path: str | Path, customers_path: str | Path) -> tuple[Instance, DatasetManifest]:
    producers_path, customers_path = Path(producers_path), Path(customers_path)
    pids, ratings, pcoords = [], [], []
    for line, (pid, rating, lat, lon) in _read_rows(producers_path, ["producer_id", "rating", "lat", "lon"]):
        try:
            ratings.append(float(rating))
        except ValueError:
            raise ParseError(f"{producers_path}:{line}: rating {rating!r} is not a number") from None
        pids.append(pid)
        pcoords.append((_coord(producers_path, line, lat), _coord(producers_path, line, lon)))
    cids, ccoords = [], []
    for line, (cid, lat, lon) in _read_rows(customers_path, ["customer_id", "lat", "lon"]):
        cids.append(cid)
        ccoords.append((_coord(customers_path, line, lat), _coord(customers_path, line, lon)))
    for name, ids in (("producer", pids), ("customer", cids)):
        if len(set(ids)) != len(ids):
            raise DuplicatePair(f"duplicate {name} id in geo input")
    inst = build_gl_custom(ratings, pcoords, ccoords)
    manifest = DatasetManifest("ratings-geo", f"{producers_path},{customers_path}", cids, pids)
    return inst, manifest


def zipf_popularity(n: int, exponent: float) -> np.ndarray:
    """Weights ``1 / rank**exponent`` for ranks 1..n (product 0 is the most popular)."""
    return np.arange(1, n + 1, dtype=np.float64) ** -exponent


def generate_synthetic(spec: SyntheticSpec) -> Instance:
    """Popularity times multiplicative noise, clamped at zero.

    ``V[u, p] = pop[p] * (1 + noise * eps)`` with ``eps`` uniform on [-1, 1].
    """
    if spec.popularity == "zipf":
        pop = zipf_popularity(spec.n, spec.exponent)
    else:
        pop = np.ones(spec.n)
    gen = _rng.stream(spec.seed, "synthetic")
    eps = gen.uniform(-1.0, 1.0, size=(spec.m, spec.n))
    V = np.maximum(pop[None, :] * (1.0 + spec.noise * eps), 0.0)
    return Instance(V)


def parse_synthetic(text: str) -> SyntheticSpec:
    """Parse ``synthetic:m=500,n=300,s=1.1,noise=0.5,seed=0,model=zipf``."""
    body = text.split(":", 1)[1] if text.startswith("synthetic:") else text
    kw: dict = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, _, val = part.partition("=")
        key = key.strip()
        if key in ("m", "n", "seed"):
            kw[key] = int(val)
        elif key in ("s", "exponent"):
            kw["exponent"] = float(val)
        elif key == "noise":
            kw["noise"] = float(val)
        elif key in ("model", "popularity"):
            kw["popularity"] = val.strip()
        else:
            raise ParseError(f"unknown synthetic parameter {key!r}")
    if "m" not in kw or "n" not in kw:
        raise ParseError("synthetic instance needs m and n")
    return SyntheticSpec(**kw)


# -- output ----------------------------------------------------------------


def write_report(reports: FairnessReport | Iterable[FairnessReport], path: str | Path, format: str = "csv") -> None:
    if isinstance(reports, FairnessReport):
        reports = [reports]
    rows = [r.row() for r in reports]
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in rows:
                w.writerow([_fmt(r[c]) for c in REPORT_COLUMNS])
    elif format == "json":
        out = [{c: (float(_fmt(v)) if isinstance(v, float) else v) for c, v in r.items()} for r in rows]
        path.write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    else:
        raise FairRecError(f"unknown report format {format!r}")


def read_report(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rec: dict = {}
            for c in REPORT_COLUMNS:
                v = row[c]
                if c == "strategy":
                    rec[c] = v
                elif c in ("k", "seed"):
                    rec[c] = int(v) if v != "" else None
                else:
                    rec[c] = float(v)
            out.append(rec)
    return out


SERIES_HEADERS = {
    "lorenz": ("producer_fraction", "exposure_fraction"),
    "cdf": ("customer_rank", "utility"),
}


def write_series(series, path: str | Path, kind: str = "lorenz", format: str = "csv") -> None:
    """Write a Lorenz curve (pairs) or a sorted utility list.

    Utility lists are written with their 0-based rank as first column.
    """
    cols = SERIES_HEADERS[kind]
    if kind == "cdf":
        pairs = list(enumerate(series))
    else:
        pairs = list(series)
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for a, b in pairs:
                w.writerow([_fmt(a if kind == "cdf" else float(a)), _fmt(float(b))])
    elif format == "json":
        out = [{cols[0]: a if kind == "cdf" else float(_fmt(float(a))), cols[1]: float(_fmt(float(b)))} for a, b in pairs]
        path.write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    else:
        raise FairRecError(f"unknown series format {format!r}")


def read_series(path: str | Path) -> list[tuple[float, float]]:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        return [tuple(d.values()) for d in data]
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [(float(a), float(b)) for a, b in reader]
