/**
 * Scripted-browser session against a real node pair: the test plays the
 * operator, reading the mirror exactly like main.ts does and steering
 * with the same modules, from a 60-degree offset to a successful grasp.
 * A soak phase then checks the console keeps up with the 60 Hz stream.
 *
 * Requires the python package (`tiltxter`) on PATH; everything else is
 * started and torn down here.
 */

import { ChildProcess, execFileSync, spawn } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import WebSocket from 'ws';

import { parseMirrorMessage, TILT_DEGREES } from '../src/protocol.js';
import { applyMessage, ConsoleState, initialState } from '../src/state.js';
import { buildCommand, initialSteer, setTarget, SteerState } from '../src/steer.js';

const SOAK_SECONDS = Number(process.env.SOAK_SECONDS ?? 60);
const REMOTE_PORT = 17000 + Math.floor(Math.random() * 2000);
const MIRROR_PORT = REMOTE_PORT + 2000;

let remote: ChildProcess;
let local: ChildProcess;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForMirror(url: string, attempts = 50): Promise<WebSocket> {
  for (let i = 0; i < attempts; i++) {
    try {
      const ws = new WebSocket(url);
      await new Promise<void>((resolve, reject) => {
        ws.once('open', resolve);
        ws.once('error', reject);
      });
      return ws;
    } catch {
      await sleep(200);
    }
  }
  throw new Error(`mirror at ${url} never came up`);
}

beforeAll(() => {
  const work = mkdtempSync(join(tmpdir(), 'console-'));
  const data = join(work, 'd.txds');
  const ckpt = join(work, 'm.ckpt');
  execFileSync('tiltxter', ['gen-dataset', '--out', data, '--seed', '202', '--reps', '2']);
  execFileSync('tiltxter', ['train', '--data', data, '--out', ckpt,
                            '--epochs', '8', '--seed', '202'],
               { timeout: 300_000 });
  remote = spawn('tiltxter', ['serve-remote', '--listen', `127.0.0.1:${REMOTE_PORT}`,
                              '--seed', '31', '--holder-tilt', '60'],
                 { stdio: 'ignore' });
  local = spawn('tiltxter', ['serve-local', '--connect', `127.0.0.1:${REMOTE_PORT}`,
                             '--ckpt', ckpt, '--mode', 'pattern',
                             '--mirror', `127.0.0.1:${MIRROR_PORT}`],
                { stdio: 'ignore' });
}, 360_000);

afterAll(() => {
  local?.kill();
  remote?.kill();
});

describe('live console session', () => {
  it('steers from a 60-degree offset to a successful grasp', async () => {
    const ws = await waitForMirror(`ws://127.0.0.1:${MIRROR_PORT}`);
    let state: ConsoleState = initialState();
    let steer: SteerState = initialSteer();
    let ackResolve: (() => void) | null = null;

    ws.on('message', (raw) => {
      const msg = parseMirrorMessage(raw.toString());
      if (msg !== null) {
        state = applyMessage(state, msg, Date.now());
        if (msg.type === 'grasp_ack' && ackResolve !== null) ackResolve();
      }
    });

    const send = (grasp: boolean) => {
      const [cmd, next] = buildCommand(steer, grasp);
      steer = next;
      ws.send(JSON.stringify(cmd));
    };

    try {
      // settle, then steer by the predicted class, like a careful operator
      for (let round = 0; round < 4; round++) {
        await sleep(700);
        const predicted = state.predicted;
        expect(state.electrodeCount).toBeGreaterThan(0);
        if (predicted === 255) continue;
        const estimate = TILT_DEGREES[predicted];
        if (estimate === 0) break;
        let desired = steer.targetDeg + estimate;
        if (desired > 90) desired -= 180;
        if (desired < -90) desired += 180;
        steer = setTarget(steer, desired);
        send(false);
        await sleep(1200); // let the slew complete (90 deg/s)
      }
      const acked = new Promise<void>((resolve) => { ackResolve = resolve; });
      send(true);
      await Promise.race([acked, sleep(5000)]);
      expect(state.lastAck).not.toBeNull();
      expect(state.lastAck!.success).toBe(true);
      expect(Math.abs(state.lastAck!.relative_centideg)).toBeLessThanOrEqual(1500);
    } finally {
      ws.close();
    }
  }, 60_000);

  it(`renders the live stream for ${SOAK_SECONDS}s without falling behind`, async () => {
    const ws = await waitForMirror(`ws://127.0.0.1:${MIRROR_PORT}`);
    let state: ConsoleState = initialState();
    ws.on('message', (raw) => {
      const msg = parseMirrorMessage(raw.toString());
      if (msg !== null) state = applyMessage(state, msg, Date.now());
    });
    try {
      await sleep(1000); // warm-up
      const startCount = state.electrodeCount;
      const halves: number[] = [];
      for (let half = 0; half < 2; half++) {
        const at = state.electrodeCount;
        await sleep((SOAK_SECONDS * 1000) / 2);
        halves.push(state.electrodeCount - at);
      }
      const received = state.electrodeCount - startCount;
      const rate = received / SOAK_SECONDS;
      // full tick-rate delivery, no widening backlog, no stale regressions
      expect(rate).toBeGreaterThanOrEqual(55);
      expect(state.staleFrames).toBe(0);
      const [first, second] = halves;
      expect(second).toBeGreaterThanOrEqual(first * 0.9);
    } finally {
      ws.close();
    }
  }, (SOAK_SECONDS + 30) * 1000);
});
