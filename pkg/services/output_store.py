import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
TABLE_SUFFIX = ".dat"


class ManifestEntry(BaseModel):
    file: str
    fingerprint: str
    written_at: str


class Manifest(BaseModel):
    entries: Dict[str, ManifestEntry] = Field(default_factory=dict)


class OutputStore:
    """
    Handles every file the lab writes: plain-text columnar tables (one header line,
    space-separated, 17 significant digits) and a manifest recording the config
    fingerprint each output was produced from.
    """

    def __init__(self, root: Path):
        self.root = Path(root)

    def ensure_dir(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        return self.root

    def path(self, name: str, suffix: str = TABLE_SUFFIX) -> Path:
        return self.root / f"{name}{suffix}"

    # manifest

    def _load_manifest(self) -> Manifest:
        # always from disk: several stores may share one output directory
        path = self.root / MANIFEST_NAME
        if not path.exists():
            return Manifest()
        try:
            return Manifest.model_validate_json(path.read_text())
        except ValidationError as e:
            logger.warning(f"Ignoring unreadable manifest {path}: {e}")
            return Manifest()

    def _record(self, name: str, path: Path, fingerprint: str) -> None:
        manifest = self._load_manifest()
        manifest.entries[name] = ManifestEntry(
            file=path.name,
            fingerprint=fingerprint,
            written_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        (self.root / MANIFEST_NAME).write_text(manifest.model_dump_json(indent=2))

    def fingerprint_of(self, name: str) -> Optional[str]:
        entry = self._load_manifest().entries.get(name)
        return entry.fingerprint if entry else None

    def is_fresh(self, name: str, fingerprint: str) -> bool:
        """True when `name` exists on disk and was produced from the same config fingerprint"""
        entry = self._load_manifest().entries.get(name)
        return entry is not None and entry.fingerprint == fingerprint and (self.root / entry.file).exists()

    # tables

    def write_table(self, name: str, columns: Sequence[str], rows, fingerprint: str) -> Path:
        data = np.atleast_2d(np.asarray(rows, dtype=float))
        if data.size and data.shape[1] != len(columns):
            raise ValueError(f"table {name}: {len(columns)} columns named, rows have {data.shape[1]}")
        self.ensure_dir()
        path = self.path(name)
        np.savetxt(path, data.reshape(-1, len(columns)), fmt="%.17g", delimiter=" ",
                   header=" ".join(columns), comments="")
        self._record(name, path, fingerprint)
        logger.info(f"Wrote {data.shape[0]} rows to {path}")
        return path

    def read_table(self, name: str) -> Optional[Tuple[List[str], np.ndarray]]:
        path = self.path(name)
        if not path.exists():
            return None
        with open(path, "r") as f:
            header = f.readline().split()
        data = np.loadtxt(path, skiprows=1, ndmin=2)
        return header, data

    def write_text(self, name: str, text: str, fingerprint: str, suffix: str = ".md") -> Path:
        self.ensure_dir()
        path = self.path(name, suffix)
        path.write_text(text)
        self._record(name, path, fingerprint)
        logger.info(f"Wrote {path}")
        return path
