"""On-disk memo of Laurent parts L_n keyed by the base function.

File layout (text, one file per function)::

    flatlab-derivative-cache 1
    spec exp(-(u))
    <n> <payload length> <payload> <checksum>
    ...

``payload`` is ``exp:num/den`` terms joined by commas and ``checksum`` is the
first 16 hex digits of sha256 over ``"<n>|<payload>"``. Writers take a lock
file and publish with an atomic rename; readers never lock.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import threading
from fractions import Fraction
from pathlib import Path

from filelock import FileLock

from flatlab.errors import CacheCorrupt
from flatlab.laurent import LaurentPoly

FORMAT_HEADER = "flatlab-derivative-cache 1"
ENV_VAR = "FLATLAB_CACHE_DIR"


def encode_poly(a: LaurentPoly) -> str:
    return ",".join(f"{k}:{c.numerator}/{c.denominator}" for k, c in a.items())


def decode_poly(payload: str) -> LaurentPoly:
    if not payload:
        return LaurentPoly()
    terms = []
    for item in payload.split(","):
        k, c = item.split(":")
        terms.append((int(k), Fraction(c)))
    return LaurentPoly(terms)


def record_checksum(n: int, payload: str) -> str:
    return hashlib.sha256(f"{n}|{payload}".encode()).hexdigest()[:16]


def spec_key(spec_text: str) -> str:
    return hashlib.sha256(spec_text.encode()).hexdigest()[:24]


def default_cache_dir() -> Path | None:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else None


class DerivativeCache:
    """Memory memo with an optional directory of per-function cache files."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[str, dict[int, LaurentPoly]] = {}
        self._lock = threading.Lock()
        self.recurrence_steps = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, spec_text: str) -> Path | None:
        if self.directory is None:
            return None
        return self.directory / f"{spec_key(spec_text)}.flc"

    # -- reading ----------------------------------------------------------

    @staticmethod
    def read_file(path: Path) -> tuple[str, dict[int, LaurentPoly]]:
        try:
            lines = path.read_text().splitlines()
        except OSError as exc:
            raise CacheCorrupt(f"{path}: unreadable ({exc})") from exc
        if len(lines) < 2 or lines[0] != FORMAT_HEADER or not lines[1].startswith("spec "):
            raise CacheCorrupt(f"{path}: bad header")
        spec_text = lines[1][len("spec "):]
        records: dict[int, LaurentPoly] = {}
        for lineno, line in enumerate(lines[2:], start=3):
            parts = line.split(" ")
            if len(parts) != 4:
                raise CacheCorrupt(f"{path}:{lineno}: malformed record")
            n_s, len_s, payload, checksum = parts
            try:
                n, length = int(n_s), int(len_s)
            except ValueError as exc:
                raise CacheCorrupt(f"{path}:{lineno}: malformed record") from exc
            if length != len(payload) or record_checksum(n, payload) != checksum:
                raise CacheCorrupt(f"{path}:{lineno}: checksum mismatch for n={n}")
            try:
                records[n] = decode_poly(payload)
            except (ValueError, ZeroDivisionError) as exc:
                raise CacheCorrupt(f"{path}:{lineno}: undecodable payload") from exc
        return spec_text, records

    def load(self, spec_text: str) -> dict[int, LaurentPoly]:
        with self._lock:
            mem = self._mem.get(spec_text)
            if mem is not None:
                return dict(mem)
        path = self.path_for(spec_text)
        if path is None or not path.exists():
            return {}
        stored_spec, records = self.read_file(path)
        if stored_spec != spec_text:
            raise CacheCorrupt(f"{path}: spec mismatch ({stored_spec!r} != {spec_text!r})")
        with self._lock:
            self._mem.setdefault(spec_text, {}).update(records)
            return dict(self._mem[spec_text])

    # -- writing ----------------------------------------------------------

    def publish(self, spec_text: str, entries: dict[int, LaurentPoly]) -> None:
        with self._lock:
            self._mem.setdefault(spec_text, {}).update(entries)
        path = self.path_for(spec_text)
        if path is None:
            return
        with FileLock(str(path) + ".lock"):
            merged: dict[int, LaurentPoly] = {}
            if path.exists():
                stored_spec, merged = self.read_file(path)
                if stored_spec != spec_text:
                    raise CacheCorrupt(f"{path}: spec mismatch")
            if all(k in merged for k in entries):
                return
            merged.update(entries)
            lines = [FORMAT_HEADER, f"spec {spec_text}"]
            for n in sorted(merged):
                payload = encode_poly(merged[n])
                lines.append(f"{n} {len(payload)} {payload} {record_checksum(n, payload)}")
            atomic_write_text(path, "\n".join(lines) + "\n")

    # -- maintenance ------------------------------------------------------

    def info(self) -> list[dict]:
        if self.directory is None:
            return [{"spec": s, "records": len(r), "n_max": max(r, default=-1), "file": None}
                    for s, r in self._mem.items()]
        out = []
        for path in sorted(self.directory.glob("*.flc")):
            try:
                spec_text, records = self.read_file(path)
                out.append({"file": path.name, "spec": spec_text, "records": len(records),
                            "n_max": max(records, default=-1), "ok": True})
            except CacheCorrupt as exc:
                out.append({"file": path.name, "ok": False, "error": str(exc)})
        return out

    def purge(self) -> int:
        with self._lock:
            self._mem.clear()
        if self.directory is None:
            return 0
        removed = 0
        for path in self.directory.glob("*.flc"):
            with FileLock(str(path) + ".lock"):
                path.unlink(missing_ok=True)
            Path(str(path) + ".lock").unlink(missing_ok=True)
            removed += 1
        return removed


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
