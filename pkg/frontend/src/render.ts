// DOM renderers. Each takes a container and replaces its contents; no framework.

import type { FeedItem, TimelineEntry } from './state.js';
import type {
  Guidance,
  InstructionOutcome,
  Logs,
  Metrics,
  ResultOutcome,
  Snapshot,
} from './types.js';

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** The full guidance as pasteable shell text (commands only, $-prefixed). */
export function guidanceCopyText(guidance: Guidance): string {
  return guidance.steps
    .filter((step) => step.command)
    .map((step) => `$ ${step.command}`)
    .join('\n');
}

export function renderTimeline(
  container: HTMLElement,
  timeline: TimelineEntry[],
  currentStage: string | null,
): void {
  container.replaceChildren();
  const list = el('ol', 'timeline');
  for (const entry of timeline) {
    const item = el('li', 'timeline-entry', '');
    item.dataset.stage = entry.stage;
    if (entry.stage === currentStage) item.classList.add('current');
    item.append(
      el('span', 'timeline-label', entry.label),
      el('span', 'timeline-at', entry.enteredAt > 0 ? `t=${entry.enteredAt}` : 'start'),
    );
    list.append(item);
  }
  container.append(list);
}

export function renderGuidance(container: HTMLElement, guidance: Guidance): void {
  container.replaceChildren();
  const card = el('div', 'guidance-card');
  if (guidance.reflective) {
    card.append(el('div', 'guidance-reflective', 'corrected after failure'));
  }
  const steps = el('ol', 'guidance-steps');
  for (const step of guidance.steps) {
    const li = el('li', 'guidance-step');
    li.append(el('div', 'guidance-explanation', step.explanation));
    if (step.command) {
      const row = el('div', 'guidance-command');
      const code = el('code', 'command-text', `$ ${step.command}`);
      const copy = el('button', 'copy-button', 'copy') as HTMLButtonElement;
      copy.type = 'button';
      copy.dataset.command = step.command;
      copy.addEventListener('click', () => {
        void navigator.clipboard?.writeText(step.command as string).catch(() => {});
        copy.textContent = 'copied';
      });
      row.append(code, copy);
      li.append(row);
    }
    steps.append(li);
  }
  card.append(steps);
  container.append(card);
}

export function renderKnowledge(container: HTMLElement, outcome: InstructionOutcome): void {
  container.replaceChildren();
  if (outcome.terminal) return;
  const card = el('dl', 'knowledge-card');
  const rows: Array<[string, string]> = [
    ['tactic', `${outcome.tactic?.id} ${outcome.tactic?.name}`],
    ['technique', `${outcome.technique?.id} ${outcome.technique?.name}`],
    [
      outcome.k === 1 ? 'action (new)' : 'action',
      `${outcome.action_id} — ${outcome.action_text}`,
    ],
  ];
  for (const [term, detail] of rows) {
    card.append(el('dt', 'knowledge-term', term), el('dd', 'knowledge-detail', detail));
  }
  if (outcome.candidates && outcome.candidates.length > 0) {
    card.append(
      el('dt', 'knowledge-term', 'candidates'),
      el('dd', 'knowledge-detail', outcome.candidates.join(', ')),
    );
  }
  container.append(card);
}

const REWARD_TEXT: Record<number, string> = {
  2: 'r=2 success — banked, next iteration',
  1: 'r=1 guidance flawed — corrected guidance below, run it again',
  0: 'r=0 wrong direction — pick a new instruction',
};

export function renderReward(container: HTMLElement, outcome: ResultOutcome): void {
  container.replaceChildren();
  const banner = el('div', `reward-banner reward-${outcome.r}`);
  banner.append(el('span', 'reward-text', REWARD_TEXT[outcome.r]));
  if (outcome.phi) banner.append(el('span', 'reward-reason', `why: ${outcome.phi}`));
  container.append(banner);
}

export function renderMetrics(container: HTMLElement, metrics: Metrics): void {
  container.replaceChildren();
  const capture = el(
    'div',
    'metrics-capture',
    `flags ${metrics.capture.captured}/${metrics.capture.total}` +
      ` — attempts ${metrics.attempts_total}`,
  );
  const table = el('table', 'metrics-table');
  for (const [stage, row] of Object.entries(metrics.per_stage)) {
    const tr = el('tr', 'metrics-row');
    tr.append(
      el('td', 'metrics-stage', stage),
      el('td', 'metrics-rate', row.rate === null ? '—' : row.rate.toFixed(3)),
      el('td', 'metrics-attempts', String(row.attempts)),
    );
    table.append(tr);
  }
  container.replaceChildren(capture, table);
}

function logEntry(kind: string, summary: string, tuple: unknown): HTMLElement {
  const entry = el('details', `log-entry ${kind}`) as HTMLDetailsElement;
  entry.append(el('summary', 'log-summary', summary));
  entry.append(el('pre', 'log-tuple', JSON.stringify(tuple, null, 2)));
  return entry;
}

export function renderLogs(container: HTMLElement, logs: Logs): void {
  container.replaceChildren();
  const wrap = el('div', 'logs');
  wrap.append(el('h3', 'logs-heading', `successes (${logs.success.length})`));
  for (const exp of logs.success) {
    wrap.append(logEntry('log-success', `[${exp.tau}] ${exp.a}: ${exp.q}`, exp));
  }
  wrap.append(el('h3', 'logs-heading', `active failures (${logs.failure.length})`));
  for (const exp of logs.failure) {
    wrap.append(logEntry('log-failure', `[r=${exp.r}] ${exp.q} — ${exp.phi}`, exp));
  }
  container.append(wrap);
}

export function renderFeed(container: HTMLElement, feed: FeedItem[]): void {
  container.replaceChildren();
  for (const item of feed) {
    switch (item.kind) {
      case 'instruction':
        container.append(el('div', 'feed-item feed-instruction', `t=${item.t} ▸ ${item.q}`));
        break;
      case 'guidance': {
        const host = el('div', 'feed-item feed-guidance');
        renderGuidance(host, item.guidance);
        container.append(host);
        break;
      }
      case 'result':
        container.append(el('div', 'feed-item feed-result', item.o));
        break;
      case 'reward': {
        const host = el('div', 'feed-item feed-reward');
        renderReward(host, item.outcome);
        container.append(host);
        break;
      }
      case 'terminal':
        container.append(
          el('div', 'feed-item feed-terminal', `engagement over — flags ${item.flags}`),
        );
        break;
    }
  }
}

export function renderSessionBanner(container: HTMLElement, snapshot: Snapshot): void {
  container.replaceChildren();
  container.append(
    el('span', 'banner-id', snapshot.session_id),
    el('span', 'banner-stage', snapshot.stage_label),
    el('span', 'banner-phase', snapshot.phase.replace('_', ' ')),
    el(
      'span',
      'banner-flags',
      `flags ${snapshot.flags.captured}/${snapshot.flags.total} · stall ${snapshot.stall}`,
    ),
  );
}
