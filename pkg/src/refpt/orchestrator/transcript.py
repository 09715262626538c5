"""Append-only session transcripts and byte-exact replay.

Every transcript line is canonical JSON (sorted keys, tight separators, no
timestamps), so re-running the same inputs through the same scripted backend
must reproduce the file byte for byte. Replay exploits that: it re-executes
the recorded operator inputs and diffs the regenerated lines against the
recorded ones, failing on the first divergence.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from ..errors import RefptError, TranscriptMismatch


def canonical_line(entry: dict[str, Any]) -> str:
    return json.dumps(entry, sort_keys=True, separators=(",", ":"))


class TranscriptWriter:
    """Writes canonical JSONL, one flushed line per entry."""

    def __init__(self, path: Optional[str | Path]):
        self.path = Path(path) if path is not None else None
        self.lines: list[str] = []
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", encoding="utf-8")

    def write(self, entry: dict[str, Any]) -> str:
        line = canonical_line(entry)
        self.lines.append(line)
        if self._fh is not None:
            self._fh.write(line + "\n")
            self._fh.flush()
        return line

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_transcript(path: str | Path) -> list[dict[str, Any]]:
    entries = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line:
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TranscriptMismatch(f"{path}:{i + 1}: unparseable line ({exc})") from exc
    return entries


def replay_session(transcript_path: str | Path, script_path: str | Path,
                   store_path: str | Path):
    """Re-execute a recorded session and verify it regenerates identically.

    Transcripts carry no filesystem paths, so the script and store the
    session originally ran against must be supplied. Returns the replayed
    Session; raises TranscriptMismatch on the first regenerated line that
    differs from the recorded one (or on missing/extra entries).
    """
    from .config import BackendConfig, SessionConfig
    from .session import Session

    recorded = Path(transcript_path).read_text(encoding="utf-8").splitlines()
    entries = read_transcript(transcript_path)
    if not entries or entries[0].get("type") != "session_start":
        raise TranscriptMismatch("transcript does not open with a session_start entry")
    start = entries[0]
    if start.get("backend_kind") != "scripted":
        raise TranscriptMismatch("only scripted-backend transcripts can be replayed")

    config = SessionConfig(
        store_path=str(store_path),
        flags_total=start["flags_total"],
        backend=BackendConfig(kind="scripted", script_path=str(script_path)),
        transcript_path=None,  # replay writes to memory only
        lambda_override=start.get("lambda"),
        session_id=start["session_id"],
    )
    session = Session.start(config)

    def check_progress():
        produced = session.transcript.lines
        for i, line in enumerate(produced):
            if i >= len(recorded):
                raise TranscriptMismatch(
                    f"replay produced extra entry #{i + 1}: {line[:120]}")
            if line != recorded[i]:
                raise TranscriptMismatch(
                    f"replay diverged at line {i + 1}:\n  recorded: "
                    f"{recorded[i][:200]}\n  replayed: {line[:200]}")

    check_progress()
    for n, entry in enumerate(entries[1:], start=2):
        kind = entry.get("type")
        try:
            if kind == "instruction":
                session.submit_instruction(entry["q"])
            elif kind == "result":
                session.submit_result(entry["o"])
            else:
                raise TranscriptMismatch(f"unknown transcript entry type {kind!r}")
        except TranscriptMismatch:
            raise
        except (RefptError, ValueError, KeyError) as exc:
            # a reordered or edited recording breaks the protocol mid-replay
            raise TranscriptMismatch(
                f"replay could not re-execute entry #{n} ({kind}): {exc}") from exc
        check_progress()
    if len(session.transcript.lines) != len(recorded):
        raise TranscriptMismatch(
            f"replay produced {len(session.transcript.lines)} entries, "
            f"recording has {len(recorded)}")
    return session
