// Browser entry: attach the console to the engine named in ?engine= (or same origin).

import { EngineClient } from './client.js';
import { OperatorConsole } from './console.js';
import { EventStream } from './events.js';

const params = new URLSearchParams(window.location.search);
const base = params.get('engine') ?? window.location.origin;
const client = new EngineClient(base);

const root = document.getElementById('app');
if (!root) throw new Error('missing #app container');
const operatorConsole = new OperatorConsole(root, client);

async function boot(): Promise<void> {
  const existing = params.get('session');
  if (existing) {
    await operatorConsole.attachSession(existing);
  } else {
    const flags = Number(params.get('flags') ?? '6');
    await operatorConsole.createSession({ flags_total: flags });
  }
  const sessionId = operatorConsole.state.snapshot?.session_id;
  if (!sessionId) return;

  const status = document.createElement('div');
  status.className = 'stream-status';
  status.textContent = 'event stream disconnected — retrying…';
  status.hidden = true;
  document.body.prepend(status);

  // pull-based updates come back with every POST; the stream keeps the
  // log/metrics panels fresh when someone else drives the same session
  const stream = new EventStream(
    (since) => client.eventsUrl(sessionId, since),
    () => {
      void client.getSession(sessionId).then((snapshot) => {
        operatorConsole.state.snapshot = snapshot;
        operatorConsole.refresh();
      });
      void operatorConsole.refreshLogs();
    },
    (connected) => {
      status.hidden = connected;
    },
  );
  stream.start();
}

void boot();
