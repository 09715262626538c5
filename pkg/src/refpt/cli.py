"""Command-line entry points."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import RefptError
from .knowledge_base import (
    KnowledgeStore,
    embed_and_index,
    ingest_records,
    read_records,
    read_source_entries,
    write_records,
)
from .llm_gateway import get_embedder
from .orchestrator import (
    BackendConfig,
    Phase,
    Session,
    SessionConfig,
    load_plan,
    replay_session,
    run_plan,
)
from .sim_target import ScriptedTarget
from .stage_machine import Stage


def _stage_text(raw: str) -> str:
    try:
        return Stage(raw).description
    except ValueError:
        return raw  # free-text stage descriptions are fine for ad-hoc queries


# --- kb ----------------------------------------------------------------------


def cmd_kb_ingest(args) -> int:
    entries = read_source_entries(args.source)
    report = ingest_records(entries)
    for entry, error in report.rejected:
        print(f"rejected {entry.get('id', '?')}: {error}", file=sys.stderr)
    write_records(args.output, report.records)
    print(f"ingested {len(report.records)} records "
          f"({len(report.rejected)} rejected) -> {args.output}")
    return 0 if report.ok or args.allow_partial else 1


def cmd_kb_build(args) -> int:
    records = read_records(args.records)
    embedder = get_embedder(args.embedder)
    store = embed_and_index(records, embedder, lambda_threshold=args.threshold)
    store.save(args.output)
    counts = store.counts()
    print(f"built store {args.output}: {counts['tactic']} tactics, "
          f"{counts['technique']} techniques, {counts['action']} actions "
          f"(dim={store.dimension}, lambda={store.lambda_threshold})")
    return 0


def cmd_kb_query(args) -> int:
    store = KnowledgeStore.load(args.store)
    if args.threshold is not None:
        store.lambda_threshold = args.threshold
    result = store.retrieve(args.instruction, _stage_text(args.stage))
    if args.as_json:
        print(json.dumps(result.to_json(), indent=2, sort_keys=True))
        return 0
    print(f"tactic:    {result.tactic.record_id}  {result.tactic.name}")
    print(f"technique: {result.technique.record_id}  {result.technique.name}")
    if not result.actions:
        print("actions:   (none above threshold)")
    for action, sim in zip(result.actions, result.similarities):
        print(f"  {sim:6.3f}  {action.record_id}  {action.name}")
    return 0


# --- serve ---------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .orchestrator.api import EngineSettings, create_app

    backend = _backend_from_args(args)
    settings = EngineSettings(
        store_path=args.store, backend=backend, flags_total=args.flags,
        transcripts_dir=args.transcripts_dir, prompts_dir=args.prompts_dir)
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _backend_from_args(args) -> BackendConfig:
    if getattr(args, "script", None):
        return BackendConfig(kind="scripted", script_path=args.script)
    return BackendConfig(kind="remote", endpoint=getattr(args, "endpoint", None),
                         model=getattr(args, "model", None))


# --- session -------------------------------------------------------------------


def _print_guidance(guidance) -> None:
    print("guidance:")
    for i, step in enumerate(guidance.steps, start=1):
        print(f"  {i}. {step.explanation}")
        if step.command:
            print(f"     $ {step.command}")


def cmd_session(args) -> int:
    config = SessionConfig(
        store_path=args.store, flags_total=args.flags,
        backend=_backend_from_args(args),
        transcript_path=args.transcript, prompts_dir=args.prompts_dir,
        lambda_override=args.threshold)
    session = Session.start(config)
    print(f"session {session.session_id} started "
          f"(flags 0/{args.flags}, stage {session.machine.current.value})")

    if args.plan:
        if not args.target:
            print("--plan needs --target", file=sys.stderr)
            return 2
        target = ScriptedTarget.load(args.target)
        plan = load_plan(args.plan)
        run_plan(session, target, plan)
        metrics = session.metrics()
        print(json.dumps(metrics, indent=2, sort_keys=True))
        print(f"finished={metrics['finished']} "
              f"capture={metrics['capture']['captured']}/{metrics['capture']['total']}")
        session.close()
        return 0

    from .orchestrator import execute_guidance

    target = ScriptedTarget.load(args.target) if args.target else None
    while session.phase is not Phase.FINISHED:
        try:
            q = input("instruction> ").strip()
        except EOFError:
            print()
            break
        if not q:
            continue
        if q in ("quit", "exit"):
            break
        out = session.submit_instruction(q)
        if out.terminal:
            print(f"terminal stage reached (flags "
                  f"{out.flags_captured}/{args.flags})")
            break
        print(f"[t={out.t}] stage={out.stage.value} "
              f"tactic={out.tactic['id']} technique={out.technique['id']} "
              f"action={out.action_id}")
        guidance = out.guidance
        _print_guidance(guidance)
        while session.phase is Phase.AWAITING_RESULT:
            o = execute_guidance(target, guidance) if target is not None else None
            if o is None:
                print("paste result, end with a single '.' line:")
                lines = []
                while True:
                    try:
                        line = input()
                    except EOFError:
                        break
                    if line == ".":
                        break
                    lines.append(line)
                o = "\n".join(lines).strip()
                if not o:
                    print("empty result; aborting iteration input", file=sys.stderr)
                    continue
            res = session.submit_result(o)
            print(f"r={res.r} route={res.route.value}"
                  + (f" reason: {res.phi}" if res.phi else ""))
            if res.guidance:
                guidance = res.guidance
                _print_guidance(guidance)
    session.close()
    metrics = session.metrics()
    print(f"capture {metrics['capture']['captured']}/{metrics['capture']['total']}")
    return 0


# --- replay ----------------------------------------------------------------------


def cmd_replay(args) -> int:
    session = replay_session(args.transcript, script_path=args.script,
                             store_path=args.store)
    metrics = session.metrics()
    print(f"replay ok: {len(session.transcript.lines)} entries, "
          f"capture {metrics['capture']['captured']}/{metrics['capture']['total']}")
    return 0


# --- target ------------------------------------------------------------------------


def cmd_target_exec(args) -> int:
    target = ScriptedTarget.load(args.scenario)
    if args.command:
        print(target.execute(args.command))
        return 0
    while True:
        try:
            cmd = input("target$ ")
        except EOFError:
            print()
            break
        if cmd.strip() in ("quit", "exit"):
            break
        print(target.execute(cmd))
    print(f"revealed {target.revealed_count}/{target.flags_total} flags")
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refpt")
    sub = parser.add_subparsers(dest="command", required=True)

    kb = sub.add_parser("kb", help="knowledge base maintenance")
    kb_sub = kb.add_subparsers(dest="kb_command", required=True)

    p = kb_sub.add_parser("ingest", help="validate raw entries into records")
    p.add_argument("source", help="raw entries (JSONL)")
    p.add_argument("-o", "--output", required=True, help="validated records (JSONL)")
    p.add_argument("--allow-partial", action="store_true",
                   help="exit 0 even when entries were rejected")
    p.set_defaults(func=cmd_kb_ingest)

    p = kb_sub.add_parser("build", help="embed records into a store file")
    p.add_argument("records", help="validated records (JSONL)")
    p.add_argument("-o", "--output", required=True, help="store file")
    p.add_argument("--embedder", default="hash-v1-256")
    p.add_argument("--threshold", type=float, default=0.45,
                   help="action similarity cutoff (lambda)")
    p.set_defaults(func=cmd_kb_build)

    p = kb_sub.add_parser("query", help="run one retrieval against a store")
    p.add_argument("store")
    p.add_argument("--instruction", required=True)
    p.add_argument("--stage", required=True,
                   help="stage token (e.g. exploitation) or free text")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--json", dest="as_json", action="store_true")
    p.set_defaults(func=cmd_kb_query)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--store", required=True)
    p.add_argument("--script", help="scripted backend file (omit for remote)")
    p.add_argument("--endpoint", help="remote backend endpoint")
    p.add_argument("--model", help="remote backend model")
    p.add_argument("--flags", type=int, default=6)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8715)
    p.add_argument("--transcripts-dir", default="transcripts")
    p.add_argument("--prompts-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("session", help="run a session in the terminal")
    p.add_argument("--store", required=True)
    p.add_argument("--script", help="scripted backend file (omit for remote)")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--flags", type=int, default=6)
    p.add_argument("--target", help="sim target scenario file")
    p.add_argument("--plan", help="operator plan file (non-interactive)")
    p.add_argument("--transcript", default=None)
    p.add_argument("--prompts-dir", default=None)
    p.add_argument("--threshold", type=float, default=None,
                   help="override the store's action cutoff")
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("replay", help="re-execute a transcript and verify it")
    p.add_argument("transcript")
    p.add_argument("--script", required=True, help="scripted backend file")
    p.add_argument("--store", required=True, help="knowledge store file")
    p.set_defaults(func=cmd_replay)

    target = sub.add_parser("target", help="sim target tools")
    target_sub = target.add_subparsers(dest="target_command", required=True)
    p = target_sub.add_parser("exec", help="run commands against a scenario")
    p.add_argument("scenario")
    p.add_argument("--command", help="run one command and exit")
    p.set_defaults(func=cmd_target_exec)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RefptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
