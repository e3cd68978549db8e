"""Load, validate, and join externally produced user-level embeddings.

Wire format is TSV: the first line is '#dim=<D>\\tmodel=<tag>', every other
line is 'user_id\\tv1\\t...\\tvD'.  The exporter that produces these files
lives outside this package; anything that writes the format can feed the
augmented-head model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

DEFAULT_DIMENSION = 512


@dataclass
class EmbeddingTable:
    dimension: int
    entries: dict[str, np.ndarray]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, user_id: str) -> bool:
        return user_id in self.entries

    def get(self, user_id: str):
        return self.entries.get(user_id)


def load_embeddings(path) -> EmbeddingTable:
    """Parse an embedding TSV; any malformed line is reported with its
    line number, and duplicate user ids are errors."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        dimension, provenance = _parse_header(header, path)
        entries: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            user_id = parts[0]
            if not user_id:
                raise DataError(f"{path}:{line_no}: empty user_id")
            if user_id in entries:
                raise DataError(f"{path}:{line_no}: duplicate user_id {user_id!r}")
            if len(parts) - 1 != dimension:
                raise DataError(
                    f"{path}:{line_no}: expected {dimension} values, got {len(parts) - 1}"
                )
            try:
                vector = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad value: {exc}") from exc
            if not np.all(np.isfinite(vector)):
                raise DataError(f"{path}:{line_no}: non-finite value")
            entries[user_id] = vector
    return EmbeddingTable(dimension=dimension, entries=entries, provenance=provenance)


def _parse_header(header: str, path) -> tuple[int, str]:
    if not header.startswith("#"):
        raise DataError(f"{path}: missing '#dim=...' header line")
    fields = dict(
        part.split("=", 1) for part in header[1:].split("\t") if "=" in part
    )
    if "dim" not in fields:
        raise DataError(f"{path}: header lacks dim=")
    try:
        dimension = int(fields["dim"])
    except ValueError as exc:
        raise DataError(f"{path}: bad dim in header: {fields['dim']!r}") from exc
    if dimension <= 0:
        raise DataError(f"{path}: dim must be positive")
    return dimension, fields.get("model", "")


def save_embeddings(table: EmbeddingTable, path) -> None:
    """Write with %.17g so a load round-trips to well below 1e-12."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#dim={table.dimension}\tmodel={table.provenance}\n")
        for user_id, vector in table.entries.items():
            fh.write(user_id + "\t" + "\t".join(f"{v:.17g}" for v in vector) + "\n")


@dataclass
class CoverageReport:
    missing: list[str]
    unused: list[str]
    covered: int

    def ok(self) -> bool:
        return not self.missing


def join_embeddings(users, table: EmbeddingTable) -> CoverageReport:
    """Check which users have embeddings; extra table ids are reported as
    unused, not errors."""
    user_ids = [u.user_id for u in users]
    wanted = set(user_ids)
    missing = [uid for uid in user_ids if uid not in table]
    unused = sorted(set(table.entries) - wanted)
    return CoverageReport(missing=missing, unused=unused, covered=len(wanted) - len(missing))
