// The operator console: one session, chat-style exchange, live panels.

import { ApiError, EngineClient } from './client.js';
import { ConsoleState } from './state.js';
import {
  renderFeed,
  renderKnowledge,
  renderLogs,
  renderMetrics,
  renderReward,
  renderSessionBanner,
  renderTimeline,
} from './render.js';

const SHELL = `
  <header id="session-banner" class="session-banner">no session</header>
  <div class="columns">
    <aside class="side">
      <section><h2>Stages</h2><div id="timeline"></div></section>
      <section><h2>Knowledge</h2><div id="knowledge"></div></section>
      <section><h2>Metrics</h2><div id="metrics"></div></section>
      <section><h2>Experience log</h2><div id="logs"></div></section>
    </aside>
    <main class="exchange">
      <div id="feed" class="feed"></div>
      <div id="reward" class="reward-slot"></div>
      <form id="instruction-form">
        <textarea id="instruction-input" placeholder="next instruction for the engine"></textarea>
        <div id="instruction-error" class="inline-error" hidden></div>
        <button id="instruction-send" type="submit">send instruction</button>
      </form>
      <form id="result-form">
        <textarea id="result-input" placeholder="paste the execution result"></textarea>
        <div id="result-error" class="inline-error" hidden></div>
        <button id="result-send" type="submit">submit result</button>
      </form>
    </main>
  </div>
`;

export class OperatorConsole {
  readonly state = new ConsoleState();
  private sessionId: string | null = null;

  constructor(
    private root: HTMLElement,
    private client: EngineClient,
  ) {
    root.innerHTML = SHELL;
    this.find<HTMLFormElement>('instruction-form').addEventListener('submit', (e) => {
      e.preventDefault();
      void this.sendInstruction();
    });
    this.find<HTMLFormElement>('result-form').addEventListener('submit', (e) => {
      e.preventDefault();
      void this.sendResult();
    });
    this.syncComposers();
  }

  private find<T extends HTMLElement>(id: string): T {
    const node = this.root.querySelector(`#${id}`);
    if (!node) throw new Error(`console shell is missing #${id}`);
    return node as T;
  }

  async createSession(body: { flags_total?: number; session_id?: string } = {}): Promise<void> {
    const snapshot = await this.client.createSession(body);
    this.sessionId = snapshot.session_id;
    this.state.attach(snapshot);
    this.refresh();
  }

  async attachSession(sessionId: string): Promise<void> {
    const snapshot = await this.client.getSession(sessionId);
    this.sessionId = snapshot.session_id;
    this.state.attach(snapshot);
    this.refresh();
  }

  async sendInstruction(): Promise<void> {
    if (!this.sessionId) return;
    const input = this.find<HTMLTextAreaElement>('instruction-input');
    const q = input.value.trim();
    if (!q) {
      this.showError('instruction', 'type an instruction first');
      return;
    }
    this.clearErrors();
    try {
      const reply = await this.client.submitInstruction(this.sessionId, q);
      this.state.applyInstruction(q, reply.outcome, reply.snapshot);
      input.value = '';
      if (!reply.outcome.terminal) {
        renderKnowledge(this.find('knowledge'), reply.outcome);
      }
      this.refresh();
    } catch (err) {
      this.surface('instruction', err);
    }
  }

  async sendResult(): Promise<void> {
    if (!this.sessionId) return;
    const input = this.find<HTMLTextAreaElement>('result-input');
    const o = input.value.trim();
    if (!o) {
      this.showError('result', 'paste the execution result first');
      return;
    }
    this.clearErrors();
    try {
      const reply = await this.client.submitResult(this.sessionId, o);
      this.state.applyResult(o, reply.outcome, reply.snapshot);
      input.value = '';
      renderReward(this.find('reward'), reply.outcome);
      this.refresh();
    } catch (err) {
      this.surface('result', err);
    }
  }

  async refreshLogs(): Promise<void> {
    if (!this.sessionId) return;
    this.state.logs = await this.client.getLogs(this.sessionId);
    renderLogs(this.find('logs'), this.state.logs);
  }

  /** Inline validation: engine-side turn errors land next to the composer. */
  private surface(slot: 'instruction' | 'result', err: unknown): void {
    if (err instanceof ApiError) {
      const wrong = err.wrongPhase;
      if (wrong) {
        this.showError(
          slot,
          `out of turn: the engine is ${wrong.actual.replace('_', ' ')}` +
            ` (this box needs ${wrong.expected.replace('_', ' ')})`,
        );
        return;
      }
      const detail = err.detail as { message?: string } | null;
      this.showError(slot, detail?.message ?? `request failed (${err.status})`);
      return;
    }
    throw err;
  }

  private showError(slot: 'instruction' | 'result', message: string): void {
    const box = this.find(`${slot}-error`);
    box.textContent = message;
    box.hidden = false;
  }

  private clearErrors(): void {
    for (const slot of ['instruction', 'result'] as const) {
      const box = this.find(`${slot}-error`);
      box.textContent = '';
      box.hidden = true;
    }
  }

  private syncComposers(): void {
    const phase = this.state.phase;
    this.find<HTMLButtonElement>('instruction-send').disabled =
      phase !== 'awaiting_instruction';
    this.find<HTMLButtonElement>('result-send').disabled = phase !== 'awaiting_result';
  }

  refresh(): void {
    const snapshot = this.state.snapshot;
    if (snapshot) {
      renderSessionBanner(this.find('session-banner'), snapshot);
      renderMetrics(this.find('metrics'), snapshot.metrics);
      renderTimeline(this.find('timeline'), this.state.timeline, snapshot.stage);
    }
    renderFeed(this.find('feed'), this.state.feed);
    this.syncComposers();
  }
}
