"""File-backed document store: one directory per project, one per revision.

Layout under the storage root:

    projects/<project_id>/project.json
    projects/<project_id>/revisions/<seq>/meta.json
    projects/<project_id>/revisions/<seq>/image.png
    projects/<project_id>/revisions/<seq>/report.json
    projects/<project_id>/revisions/<seq>/artifacts/*.png

The store is the only component that touches the filesystem, so a
document database could substitute behind the same methods.
"""
from __future__ import annotations

import json
import os
import shutil
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnknownProject, UnknownRevision, ValidationError


def _atomic_write(path: Path, data: bytes) -> None:
    """Write via a temp file + rename so readers never see partial content."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)

REVISION_STATUSES = ("queued", "analyzing", "complete", "failed")


@dataclass
class Project:
    id: str
    owner: str
    name: str
    created_at: str
    revisions: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "owner": self.owner,
            "name": self.name,
            "created_at": self.created_at,
            "revisions": list(self.revisions),
        }


@dataclass
class RevisionRecord:
    id: str
    project_id: str
    sequence: int
    status: str
    image_ref: str
    report_ref: str | None
    error: dict | None
    uploaded_at: str
    started_at: str | None = None
    finished_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "project_id": self.project_id,
            "sequence": self.sequence,
            "status": self.status,
            "image_ref": self.image_ref,
            "report_ref": self.report_ref,
            "error": self.error,
            "uploaded_at": self.uploaded_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RevisionRecord":
        return cls(**doc)


class FileStore:
    def __init__(self, root: str | Path, clock):
        self.root = Path(root)
        self.clock = clock
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def project_lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    # -- projects ----------------------------------------------------------

    def _project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def create_project(self, owner: str, name: str) -> Project:
        if not name or not name.strip():
            raise ValidationError("project name must be nonempty")
        project = Project(
            id=uuid.uuid4().hex[:12],
            owner=owner,
            name=name.strip(),
            created_at=self.clock(),
        )
        pdir = self._project_dir(project.id)
        (pdir / "revisions").mkdir(parents=True)
        self._write_project(project)
        return project

    def _write_project(self, project: Project) -> None:
        path = self._project_dir(project.id) / "project.json"
        _atomic_write(path, json.dumps(project.to_dict(), sort_keys=True).encode("utf-8"))

    def get_project(self, project_id: str) -> Project:
        path = self._project_dir(project_id) / "project.json"
        if not path.exists():
            raise UnknownProject(f"project {project_id!r} does not exist")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return Project(**doc)

    def list_projects(self, owner: str | None = None) -> list[Project]:
        projects = []
        for pdir in sorted((self.root / "projects").iterdir()):
            meta = pdir / "project.json"
            if not meta.exists():
                continue
            project = Project(**json.loads(meta.read_text(encoding="utf-8")))
            if owner is None or project.owner == owner:
                projects.append(project)
        projects.sort(key=lambda p: (p.created_at, p.id))
        return projects

    def delete_project(self, project_id: str) -> None:
        pdir = self._project_dir(project_id)
        if not (pdir / "project.json").exists():
            raise UnknownProject(f"project {project_id!r} does not exist")
        shutil.rmtree(pdir)

    # -- revisions ---------------------------------------------------------

    def _revision_dir(self, project_id: str, sequence: int) -> Path:
        return self._project_dir(project_id) / "revisions" / str(sequence)

    def create_revision(self, project_id: str, image_png: bytes) -> RevisionRecord:
        """Persist the image under the next sequence number (status queued).

        Callers must hold the project lock so concurrent uploads to one
        project cannot interleave sequence numbers.
        """
        project = self.get_project(project_id)
        sequence = (project.revisions[-1] + 1) if project.revisions else 1
        rdir = self._revision_dir(project_id, sequence)
        (rdir / "artifacts").mkdir(parents=True)
        (rdir / "image.png").write_bytes(image_png)
        record = RevisionRecord(
            id=f"{project_id}.{sequence}",
            project_id=project_id,
            sequence=sequence,
            status="queued",
            image_ref="image.png",
            report_ref=None,
            error=None,
            uploaded_at=self.clock(),
        )
        self._write_revision(record)
        project.revisions.append(sequence)
        self._write_project(project)
        return record

    def _write_revision(self, record: RevisionRecord) -> None:
        path = self._revision_dir(record.project_id, record.sequence) / "meta.json"
        _atomic_write(path, json.dumps(record.to_dict(), sort_keys=True).encode("utf-8"))

    def get_revision(self, project_id: str, sequence: int) -> RevisionRecord:
        path = self._revision_dir(project_id, sequence) / "meta.json"
        if not path.exists():
            self.get_project(project_id)  # raises UnknownProject when missing
            raise UnknownRevision(f"revision {sequence} does not exist in project {project_id!r}")
        return RevisionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_revisions(self, project_id: str) -> list[RevisionRecord]:
        project = self.get_project(project_id)
        return [self.get_revision(project_id, seq) for seq in project.revisions]

    def update_revision(self, record: RevisionRecord) -> None:
        if record.status not in REVISION_STATUSES:
            raise ValidationError(f"invalid revision status {record.status!r}")
        self._write_revision(record)

    # -- documents and artifacts -------------------------------------------

    def save_report_document(self, project_id: str, sequence: int, data: bytes) -> str:
        path = self._revision_dir(project_id, sequence) / "report.json"
        _atomic_write(path, data)
        return "report.json"

    def load_report_document(self, project_id: str, sequence: int) -> bytes:
        path = self._revision_dir(project_id, sequence) / "report.json"
        if not path.exists():
            raise UnknownRevision(f"no report stored for revision {sequence}")
        return path.read_bytes()

    def write_artifact(self, project_id: str, sequence: int, name: str, data: bytes) -> None:
        path = self._revision_dir(project_id, sequence) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)

    def read_artifact(self, relpath: str) -> bytes:
        base = (self.root / "projects").resolve()
        path = (base / relpath).resolve()
        if not path.is_relative_to(base):
            raise ValidationError(f"artifact path {relpath!r} escapes the store")
        if not path.is_file():
            raise UnknownRevision(f"artifact {relpath!r} does not exist")
        return path.read_bytes()

    def read_image(self, project_id: str, sequence: int) -> bytes:
        record = self.get_revision(project_id, sequence)
        return (self._revision_dir(project_id, sequence) / record.image_ref).read_bytes()

    # -- recovery ----------------------------------------------------------

    def scan_for_recovery(self) -> list[RevisionRecord]:
        """Find revisions needing attention after a restart.

        Queued revisions are returned for re-enqueueing; revisions stuck
        in analyzing are marked failed.
        """
        to_enqueue = []
        for pdir in (self.root / "projects").iterdir():
            meta = pdir / "project.json"
            if not meta.exists():
                continue
            project = Project(**json.loads(meta.read_text(encoding="utf-8")))
            for seq in project.revisions:
                record = self.get_revision(project.id, seq)
                if record.status == "queued":
                    to_enqueue.append(record)
                elif record.status == "analyzing":
                    record.status = "failed"
                    record.error = {"stage": "interrupted", "message": "service restarted mid-analysis"}
                    record.finished_at = self.clock()
                    self._write_revision(record)
        to_enqueue.sort(key=lambda r: (r.project_id, r.sequence))
        return to_enqueue
