// Wire types mirroring the engine's JSON payloads.

export type Phase = 'awaiting_instruction' | 'awaiting_result' | 'finished';

export type StageName =
  | 'information_gathering'
  | 'vulnerability_identification'
  | 'exploitation'
  | 'post_exploitation'
  | 'capture_the_flag'
  | 'documentation'
  | 'terminal';

export type Route = 'next_iteration' | 'generator' | 'navigator';

export interface GuidanceStep {
  explanation: string;
  command: string | null;
  observe_only?: boolean;
}

export interface Guidance {
  steps: GuidanceStep[];
  reflective: boolean;
}

export interface RecordRef {
  id: string;
  name: string;
}

export interface InstructionOutcome {
  t: number;
  terminal: boolean;
  stage: StageName;
  stall: number;
  flags_captured: number;
  event: Record<string, string>;
  transitioned: boolean;
  tactic?: RecordRef | null;
  technique?: RecordRef | null;
  action_id?: string | null;
  action_text?: string | null;
  k?: number | null;
  candidates?: string[];
  guidance?: Guidance | null;
}

export interface ResultOutcome {
  t: number;
  r: 0 | 1 | 2;
  phi: string | null;
  route: Route;
  stage: StageName;
  stall: number;
  flags_captured: number;
  finished: boolean;
  guidance: Guidance | null;
}

export interface PendingIteration {
  q: string;
  action_id: string;
  action_text: string;
  k: number;
  tactic: string;
  technique: string;
  guidance: Guidance;
}

export interface StageMetrics {
  rate: number | null;
  occupancies: number;
  attempts: number;
  successes: number;
}

export interface Metrics {
  per_stage: Record<string, StageMetrics>;
  attempts_total: number;
  capture: { captured: number; total: number; rate: number };
  finished: boolean;
}

export interface Snapshot {
  session_id: string;
  phase: Phase;
  t: number;
  stage: StageName;
  stage_label: string;
  committed_stage: StageName;
  stall: number;
  flags: { captured: number; total: number };
  pending: PendingIteration | null;
  metrics: Metrics;
}

export interface SuccessTuple {
  q: string;
  tau: StageName;
  c: string;
  u: string;
  a: string;
  r: 2;
  o: string;
}

export interface FailureTuple {
  q: string;
  tau: StageName;
  c: string;
  u: string;
  a: string;
  r: 0 | 1;
  g: string;
  o: string;
  phi: string;
}

export interface Logs {
  success: SuccessTuple[];
  failure: FailureTuple[];
  generated_actions: Record<string, string>;
}

export interface WrongPhaseDetail {
  error: 'WrongPhase';
  expected: Phase;
  actual: Phase;
  message: string;
}

export interface EngineEvent {
  seq: number;
  event: string;
  data: Record<string, unknown>;
  phase: Phase;
}
