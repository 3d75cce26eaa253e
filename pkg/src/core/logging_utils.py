from __future__ import annotations
import json
from pathlib import Path
from datetime import datetime, timezone
from typing import Any, Dict, Iterable

class JsonLogger:
    """Append-only JSON-lines writer.

    With stamp=False no timestamp is added, which keeps transcript files
    byte-identical across runs with the same seed.
    """

    def __init__(self, root: Path, name: str = "workbench", stamp: bool = True, subdir: str = "logs") -> None:
        self.dir = Path(root) / subdir if subdir else Path(root)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.base = self.dir / f"{name}.jsonl"
        self.stamp = stamp

    @classmethod
    def for_file(cls, path: Path, stamp: bool = False) -> "JsonLogger":
        path = Path(path)
        logger = cls(path.parent, path.stem, stamp=stamp, subdir="")
        logger.base = path
        return logger

    def _line(self, record: Dict[str, Any]) -> str:
        if self.stamp:
            ts = datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"
            record = {"ts": ts, **record}
        return json.dumps(record, ensure_ascii=False, sort_keys=not self.stamp)

    def write(self, record: Dict[str, Any]) -> None:
        with self.base.open("a", encoding="utf-8") as f:
            f.write(self._line(record) + "\n")

    def write_many(self, records: Iterable[Dict[str, Any]]) -> None:
        with self.base.open("a", encoding="utf-8") as f:
            for record in records:
                f.write(self._line(record) + "\n")

    def truncate(self) -> None:
        self.base.write_text("", encoding="utf-8")
