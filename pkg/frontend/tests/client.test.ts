import { describe, expect, it, vi } from 'vitest';
import { ApiError, EngineClient } from '../src/client.js';

const ok = (body: unknown) => new Response(JSON.stringify(body), { status: 200 });

describe('EngineClient', () => {
  it('hits the expected routes with JSON bodies', async () => {
    const calls: Array<[string, RequestInit | undefined]> = [];
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      calls.push([url, init]);
      return ok({});
    });
    const client = new EngineClient('http://e.test/', fetchFn);
    await client.health();
    await client.createSession({ flags_total: 6 });
    await client.submitInstruction('s1', 'scan the box');
    await client.submitResult('s1', 'port 80 open');
    await client.getLogs('s1');
    await client.getMetrics('s1');
    await client.getRecord('s1', 'AC-1');
    expect(calls.map(([url]) => url)).toEqual([
      'http://e.test/healthz',
      'http://e.test/sessions',
      'http://e.test/sessions/s1/instruction',
      'http://e.test/sessions/s1/result',
      'http://e.test/sessions/s1/logs',
      'http://e.test/sessions/s1/metrics',
      'http://e.test/sessions/s1/knowledge/AC-1',
    ]);
    expect(calls[2][1]?.method).toBe('POST');
    expect(JSON.parse(String(calls[2][1]?.body))).toEqual({ q: 'scan the box' });
    expect(JSON.parse(String(calls[3][1]?.body))).toEqual({ o: 'port 80 open' });
  });

  it('builds resumable event-stream urls', () => {
    const client = new EngineClient('http://e.test');
    expect(client.eventsUrl('s1')).toBe('http://e.test/sessions/s1/events?since=0');
    expect(client.eventsUrl('s1', 41)).toBe('http://e.test/sessions/s1/events?since=41');
  });

  it('unwraps error bodies into ApiError', async () => {
    const fetchFn = async () =>
      new Response(JSON.stringify({ detail: { error: 'NoScriptMatch', message: 'no entry' } }), {
        status: 502,
      });
    const client = new EngineClient('http://e.test', fetchFn);
    const err = await client.getSession('s1').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
    expect(err.detail).toEqual({ error: 'NoScriptMatch', message: 'no entry' });
    expect(err.wrongPhase).toBeNull();
  });

  it('recognises the 409 wrong-phase payload', async () => {
    const detail = {
      error: 'WrongPhase',
      expected: 'awaiting_result',
      actual: 'awaiting_instruction',
      message: 'no pending iteration',
    };
    const fetchFn = async () => new Response(JSON.stringify({ detail }), { status: 409 });
    const client = new EngineClient('http://e.test', fetchFn);
    const err: ApiError = await client.submitResult('s1', 'x').catch((e) => e);
    expect(err.wrongPhase).toEqual(detail);
  });

  it('treats a 409 without the marker as an ordinary error', async () => {
    const fetchFn = async () =>
      new Response(JSON.stringify({ detail: { error: 'Conflict', message: 'busy' } }), {
        status: 409,
      });
    const client = new EngineClient('http://e.test', fetchFn);
    const err: ApiError = await client.submitResult('s1', 'x').catch((e) => e);
    expect(err.wrongPhase).toBeNull();
  });

  it('tolerates non-JSON error bodies', async () => {
    const fetchFn = async () => new Response('bad gateway', { status: 500 });
    const client = new EngineClient('http://e.test', fetchFn);
    const err: ApiError = await client.health().catch((e) => e);
    expect(err.status).toBe(500);
    expect(err.detail).toBeNull();
  });
});
