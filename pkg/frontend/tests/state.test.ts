import { describe, expect, it } from 'vitest';

import { ElectrodeMsg, StatusMsg } from '../src/protocol.js';
import { applyMessage, heartbeatFresh, initialState, LATENCY_TRAIL } from '../src/state.js';

function electrode(seq: number, fill = 0): ElectrodeMsg {
  return { type: 'electrode', seq, t_us: 0,
           left: new Array(20).fill(fill), right: new Array(20).fill(fill), predicted: 4 };
}

describe('console state reducer', () => {
  it('always mirrors the most recent electrode frame', () => {
    let s = initialState();
    s = applyMessage(s, electrode(1, 10));
    s = applyMessage(s, electrode(2, 200));
    expect(s.left[0]).toBe(200);
    expect(s.lastElectrodeSeq).toBe(2);
    expect(s.electrodeCount).toBe(2);
    expect(s.staleFrames).toBe(0);
  });

  it('counts stale frames instead of regressing', () => {
    let s = initialState();
    s = applyMessage(s, electrode(5, 50));
    s = applyMessage(s, electrode(4, 99));
    expect(s.left[0]).toBe(50); // latest wins, old frame dropped
    expect(s.staleFrames).toBe(1);
  });

  it('tracks heartbeat freshness', () => {
    let s = initialState();
    expect(heartbeatFresh(s, 1000)).toBe(false);
    s = applyMessage(s, { type: 'heartbeat', seq: 1, t_us: 0 }, 1000);
    expect(heartbeatFresh(s, 1500)).toBe(true);
    expect(heartbeatFresh(s, 4000)).toBe(false);
  });

  it('keeps a bounded latency trail', () => {
    let s = initialState();
    for (let i = 0; i < 100; i++) {
      const status: StatusMsg = { type: 'status', tick: i, mode: 2, overruns: i,
                                  dropped_pairs: 0, latency_ms: { p99: i * 0.1 } };
      s = applyMessage(s, status);
    }
    expect(s.latencyTrail.length).toBe(LATENCY_TRAIL);
    expect(s.overruns).toBe(99);
    expect(s.latencyTrail.at(-1)).toBeCloseTo(9.9);
  });

  it('stores grasp results for the banner', () => {
    const s = applyMessage(initialState(),
      { type: 'grasp_ack', seq: 1, t_us: 0, success: true, relative_centideg: 30 });
    expect(s.lastAck!.success).toBe(true);
  });
});
