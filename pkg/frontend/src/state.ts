// Console-side session state: the chat feed, the stage timeline, metrics.

import type {
  Guidance,
  InstructionOutcome,
  Logs,
  Metrics,
  ResultOutcome,
  Snapshot,
  StageName,
} from './types.js';

export const STAGE_LABELS: Record<StageName, string> = {
  information_gathering: 'Information Gathering',
  vulnerability_identification: 'Vulnerability Identification',
  exploitation: 'Exploitation',
  post_exploitation: 'Post-Exploitation',
  capture_the_flag: 'Capture the Flag',
  documentation: 'Documentation',
  terminal: 'Terminal Process',
};

export interface TimelineEntry {
  stage: StageName;
  label: string;
  enteredAt: number; // iteration t when the stage became current (0 = session start)
}

export type FeedItem =
  | { kind: 'instruction'; t: number; q: string }
  | { kind: 'guidance'; t: number; guidance: Guidance }
  | { kind: 'result'; t: number; o: string }
  | { kind: 'reward'; t: number; outcome: ResultOutcome }
  | { kind: 'terminal'; t: number; flags: number };

export class ConsoleState {
  snapshot: Snapshot | null = null;
  timeline: TimelineEntry[] = [];
  feed: FeedItem[] = [];
  lastInstruction: InstructionOutcome | null = null;
  lastResult: ResultOutcome | null = null;
  logs: Logs | null = null;

  attach(snapshot: Snapshot): void {
    this.snapshot = snapshot;
    if (this.timeline.length === 0) {
      this.timeline.push({
        stage: snapshot.stage,
        label: STAGE_LABELS[snapshot.stage],
        enteredAt: snapshot.t,
      });
    }
  }

  private enterStage(stage: StageName, t: number): void {
    const current = this.timeline[this.timeline.length - 1];
    if (!current || current.stage !== stage) {
      this.timeline.push({ stage, label: STAGE_LABELS[stage], enteredAt: t });
    }
  }

  applyInstruction(q: string, outcome: InstructionOutcome, snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.lastInstruction = outcome;
    this.feed.push({ kind: 'instruction', t: outcome.t, q });
    this.enterStage(outcome.stage, outcome.t);
    if (outcome.terminal) {
      this.feed.push({ kind: 'terminal', t: outcome.t, flags: outcome.flags_captured });
    } else if (outcome.guidance) {
      this.feed.push({ kind: 'guidance', t: outcome.t, guidance: outcome.guidance });
    }
  }

  applyResult(o: string, outcome: ResultOutcome, snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.lastResult = outcome;
    this.feed.push({ kind: 'result', t: outcome.t, o });
    this.feed.push({ kind: 'reward', t: outcome.t, outcome });
    this.enterStage(outcome.stage, outcome.t);
    if (outcome.guidance) {
      this.feed.push({ kind: 'guidance', t: outcome.t, guidance: outcome.guidance });
    }
  }

  get phase(): Snapshot['phase'] | null {
    return this.snapshot?.phase ?? null;
  }

  get metrics(): Metrics | null {
    return this.snapshot?.metrics ?? null;
  }
}
