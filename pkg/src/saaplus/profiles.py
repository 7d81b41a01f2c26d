"""Schema-versioned profile documents and the directory-backed store.

Profiles persist as one JSON file per id. Writers are serialized per id
and guarded by an optimistic version field: an update must carry exactly
the stored version + 1, anything else is a stale write. The parse/serialize
pair is lossless, so documents round-trip byte-for-byte through the store.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from .core import PromptProfile
from .errors import ConfigError

SCHEMA_VERSION = 1
_ID_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.")


class StaleProfileWrite(ConfigError):
    """The incoming document's version does not follow the stored one."""


@dataclass(frozen=True)
class ProfileDocument:
    id: str
    display_name: str
    profile: PromptProfile
    version: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if not self.id or not set(self.id) <= _ID_CHARS:
            raise ConfigError(f"bad profile id {self.id!r}: use [A-Za-z0-9._-]")
        if self.version < 1:
            raise ConfigError(f"profile version must be >= 1, got {self.version}")
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported profile schema version {self.schema_version}")

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "id": self.id,
            "display_name": self.display_name,
            "version": self.version,
            "profile": self.profile.to_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProfileDocument":
        if not isinstance(data, dict):
            raise ConfigError("profile document must be a JSON object")
        missing = {"schema_version", "id", "display_name", "version", "profile"} - set(data)
        if missing:
            raise ConfigError(f"profile document missing fields {sorted(missing)}")
        return cls(
            id=str(data["id"]),
            display_name=str(data["display_name"]),
            profile=PromptProfile.from_dict(data["profile"]),
            version=int(data["version"]),
            schema_version=int(data["schema_version"]),
        )


def load_profile_document(path: str | Path) -> ProfileDocument:
    """Read a profile file: either a full document or a bare profile object
    (which gets wrapped with defaults derived from the file name)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"profile file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"profile file {path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "profile" in data:
        return ProfileDocument.from_json_dict(data)
    return ProfileDocument(id=path.stem, display_name=path.stem, profile=PromptProfile.from_dict(data))


class ProfileStore:
    """Directory of {id}.json profile documents with per-id write locking."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, profile_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(profile_id, threading.Lock())

    def _path(self, profile_id: str) -> Path:
        return self.directory / f"{profile_id}.json"

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def get(self, profile_id: str) -> ProfileDocument:
        path = self._path(profile_id)
        if not path.exists():
            raise KeyError(profile_id)
        doc = ProfileDocument.from_json_dict(json.loads(path.read_text()))
        if doc.id != profile_id:
            raise ConfigError(f"profile file {path} carries id {doc.id!r}")
        return doc

    def put(self, document: ProfileDocument) -> ProfileDocument:
        """Store the document. Updates must carry stored version + 1."""
        with self._lock_for(document.id):
            path = self._path(document.id)
            if path.exists():
                current = ProfileDocument.from_json_dict(json.loads(path.read_text()))
                if document.version != current.version + 1:
                    raise StaleProfileWrite(
                        f"profile {document.id!r}: stored version is {current.version}, "
                        f"write carries {document.version} (expected {current.version + 1})"
                    )
            text = json.dumps(document.to_json_dict(), indent=1, sort_keys=True) + "\n"
            path.write_text(text)
            return document

    def seed(self, document: ProfileDocument) -> None:
        """Write without version checks; for initial provisioning only."""
        with self._lock_for(document.id):
            text = json.dumps(document.to_json_dict(), indent=1, sort_keys=True) + "\n"
            self._path(document.id).write_text(text)


def bump(document: ProfileDocument, **profile_changes) -> ProfileDocument:
    """Next-version copy of a document, optionally with profile changes."""
    profile = replace(document.profile, **profile_changes) if profile_changes else document.profile
    return replace(document, profile=profile, version=document.version + 1)
