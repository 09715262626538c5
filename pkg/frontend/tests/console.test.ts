import { describe, expect, it } from 'vitest';
import { EngineClient } from '../src/client.js';
import { OperatorConsole } from '../src/console.js';
import { MockEngine } from './mock_engine.js';

function setup() {
  document.body.innerHTML = '';
  const root = document.createElement('div');
  document.body.append(root);
  const engine = new MockEngine();
  const ui = new OperatorConsole(root, new EngineClient('http://engine.test', engine.fetch));
  return { root, engine, ui };
}

function type(root: HTMLElement, id: string, value: string) {
  (root.querySelector(`#${id}`) as HTMLTextAreaElement).value = value;
}

function button(root: HTMLElement, id: string): HTMLButtonElement {
  return root.querySelector(`#${id}`) as HTMLButtonElement;
}

const text = (root: HTMLElement, selector: string) =>
  root.querySelector(selector)?.textContent ?? '';

const tick = () => new Promise((resolve) => setTimeout(resolve, 0));

describe('operator console', () => {
  it('runs instruction → guidance → result → reward across three iterations', async () => {
    const { root, ui } = setup();
    await ui.createSession();
    expect(text(root, '#session-banner')).toContain('mock-1');
    expect(button(root, 'instruction-send').disabled).toBe(false);
    expect(button(root, 'result-send').disabled).toBe(true);

    // iteration 1: instruction in, guidance out
    type(root, 'instruction-input', 'map the perimeter services');
    await ui.sendInstruction();
    expect(text(root, '#feed .feed-instruction')).toContain('map the perimeter services');
    const copy = root.querySelector('#feed .copy-button') as HTMLButtonElement;
    expect(copy.dataset.command).toBe('nmap -sV 10.0.0.5');
    expect(text(root, '#knowledge')).toContain('TA-RECON');
    expect(text(root, '#knowledge')).toContain('Reconnaissance');
    expect(button(root, 'instruction-send').disabled).toBe(true);
    expect(button(root, 'result-send').disabled).toBe(false);

    copy.click();
    expect(copy.textContent).toBe('copied');

    // result in, reward out
    type(root, 'result-input', '8080/tcp open http Apache httpd 2.4.49');
    await ui.sendResult();
    expect(root.querySelector('#reward .reward-banner')?.className).toContain('reward-2');
    expect(text(root, '#reward')).toContain('r=2 success');
    expect(button(root, 'instruction-send').disabled).toBe(false);

    // iteration 2: a flawed guidance round-trips through the corrected one
    type(root, 'instruction-input', 'find a known weakness in that version');
    await ui.sendInstruction();
    type(root, 'result-input', 'searchsploit returned no entries');
    await ui.sendResult();
    expect(text(root, '#reward')).toContain('r=1 guidance flawed');
    expect(text(root, '#reward')).toContain('wrong version string');
    const cards = root.querySelectorAll('#feed .guidance-card');
    const corrected = cards[cards.length - 1] as HTMLElement;
    expect(corrected.querySelector('.guidance-reflective')?.textContent).toBe(
      'corrected after failure',
    );
    expect((corrected.querySelector('.copy-button') as HTMLButtonElement).dataset.command).toBe(
      'searchsploit apache 2.4.50',
    );
    // still the result box's turn: the corrected guidance must be executed
    expect(button(root, 'result-send').disabled).toBe(false);
    expect(button(root, 'instruction-send').disabled).toBe(true);

    type(root, 'result-input', 'Apache 2.4.49/2.4.50 path traversal RCE (EDB-50383)');
    await ui.sendResult();
    expect(text(root, '#reward')).toContain('r=2 success');

    // iteration 3: generated action, then the banked success
    type(root, 'instruction-input', 'get code execution through the traversal bug');
    await ui.sendInstruction();
    expect(text(root, '#knowledge')).toContain('action (new)');
    expect(text(root, '#knowledge')).toContain('GEN-3');
    type(root, 'result-input', 'uid=1(daemon) — interactive shell returned');
    await ui.sendResult();
    expect(text(root, '#reward')).toContain('r=2 success');

    // the whole exchange is on the feed, rewards in scripted order
    const banners = [...root.querySelectorAll('#feed .reward-banner')];
    expect(banners.map((b) => (b as HTMLElement).className)).toEqual([
      'reward-banner reward-2',
      'reward-banner reward-1',
      'reward-banner reward-2',
      'reward-banner reward-2',
    ]);

    await ui.refreshLogs();
    expect(text(root, '#logs')).toContain('successes (3)');
    expect(text(root, '#logs')).toContain('active failures (0)');
    const firstSuccess = root.querySelector('#logs details.log-success') as HTMLElement;
    expect(firstSuccess.querySelector('summary')?.textContent).toContain(
      'map the perimeter services',
    );
    expect(firstSuccess.querySelector('pre')?.textContent).toContain('"r": 2');
  });

  it('renders the stage timeline transitions for the scripted session', async () => {
    const { root, ui } = setup();
    await ui.createSession();
    for (const [q, results] of [
      ['map the perimeter services', ['scan output']],
      ['find a known weakness', ['nothing found', 'EDB-50383 matches']],
      ['exploit the traversal', ['shell returned']],
    ] as Array<[string, string[]]>) {
      type(root, 'instruction-input', q);
      await ui.sendInstruction();
      for (const o of results) {
        type(root, 'result-input', o);
        await ui.sendResult();
      }
    }

    const entries = [...root.querySelectorAll('#timeline li')] as HTMLElement[];
    expect(entries.map((li) => li.dataset.stage)).toEqual([
      'information_gathering',
      'vulnerability_identification',
      'exploitation',
    ]);
    expect(entries[0].textContent).toContain('Information Gathering');
    expect(entries[0].textContent).toContain('start');
    expect(entries[1].textContent).toContain('t=2');
    expect(entries[2].textContent).toContain('t=3');
    expect(entries[2].classList.contains('current')).toBe(true);
    expect(entries[0].classList.contains('current')).toBe(false);
  });

  it('surfaces wrong-phase rejections as inline validation', async () => {
    const { root, ui } = setup();
    await ui.createSession();

    // a result before any instruction is out of turn
    type(root, 'result-input', 'premature output');
    await ui.sendResult();
    const resultError = root.querySelector('#result-error') as HTMLElement;
    expect(resultError.hidden).toBe(false);
    expect(resultError.textContent).toContain('out of turn');
    expect(resultError.textContent).toContain('engine is awaiting instruction');
    expect(resultError.textContent).toContain('needs awaiting result');
    expect(root.querySelectorAll('#feed .feed-item').length).toBe(0);

    // the session is intact: the legal call clears the error and proceeds
    type(root, 'instruction-input', 'map the perimeter services');
    await ui.sendInstruction();
    expect(resultError.hidden).toBe(true);
    expect(root.querySelectorAll('#feed .feed-item').length).toBe(2);

    // now a second instruction is the out-of-turn one
    type(root, 'instruction-input', 'another instruction too early');
    await ui.sendInstruction();
    const instructionError = root.querySelector('#instruction-error') as HTMLElement;
    expect(instructionError.hidden).toBe(false);
    expect(instructionError.textContent).toContain('needs awaiting instruction');
    expect(root.querySelectorAll('#feed .feed-item').length).toBe(2);
  });

  it('validates empty composers locally', async () => {
    const { root, engine, ui } = setup();
    await ui.createSession();
    await ui.sendInstruction();
    expect(text(root, '#instruction-error')).toBe('type an instruction first');
    expect(engine.calls.filter((c) => c.path.endsWith('/instruction'))).toEqual([]);
  });

  it('drives the exchange through real form submits', async () => {
    const { root, ui } = setup();
    await ui.createSession();
    type(root, 'instruction-input', 'probe the target');
    root
      .querySelector('#instruction-form')!
      .dispatchEvent(new Event('submit', { cancelable: true }));
    await tick();
    expect(text(root, '#feed')).toContain('probe the target');
    type(root, 'result-input', 'two services exposed');
    root.querySelector('#result-form')!.dispatchEvent(new Event('submit', { cancelable: true }));
    await tick();
    expect(text(root, '#reward')).toContain('r=2 success');
  });
});
