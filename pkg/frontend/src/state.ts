/**
 * Console state: a pure reducer over mirror messages.  The UI renders
 * whatever is here; killing the console never changes node behavior.
 */

import { ElectrodeMsg, GraspAckMsg, MirrorMessage, NO_PREDICTION } from './protocol.js';

export type Connection = 'connecting' | 'connected' | 'disconnected';

export interface ConsoleState {
  connection: Connection;
  /** most recent electrode grids, 20 bytes each, row-major 5x4 */
  left: number[];
  right: number[];
  predicted: number;
  lastElectrodeSeq: number;
  electrodeCount: number;
  /** seq regressions observed (must stay 0: latest always wins) */
  staleFrames: number;
  lastHeartbeatAt: number | null;
  lastAck: GraspAckMsg | null;
  /** node-reported p99 tick latency samples for the sparkline */
  latencyTrail: number[];
  overruns: number;
}

export const LATENCY_TRAIL = 60;

export function initialState(): ConsoleState {
  return {
    connection: 'connecting',
    left: new Array(20).fill(0),
    right: new Array(20).fill(0),
    predicted: NO_PREDICTION,
    lastElectrodeSeq: -1,
    electrodeCount: 0,
    staleFrames: 0,
    lastHeartbeatAt: null,
    lastAck: null,
    latencyTrail: [],
    overruns: 0,
  };
}

export function setConnection(state: ConsoleState, connection: Connection): ConsoleState {
  return { ...state, connection };
}

/** Fold one mirror message into the state; grids always mirror the latest. */
export function applyMessage(state: ConsoleState, msg: MirrorMessage, now = 0): ConsoleState {
  switch (msg.type) {
    case 'electrode': {
      const stale = msg.seq <= state.lastElectrodeSeq;
      if (stale) {
        return { ...state, staleFrames: state.staleFrames + 1 };
      }
      return {
        ...state,
        left: (msg as ElectrodeMsg).left,
        right: (msg as ElectrodeMsg).right,
        predicted: msg.predicted,
        lastElectrodeSeq: msg.seq,
        electrodeCount: state.electrodeCount + 1,
      };
    }
    case 'heartbeat':
      return { ...state, lastHeartbeatAt: now };
    case 'grasp_ack':
      return { ...state, lastAck: msg };
    case 'status': {
      const p99 = msg.latency_ms.p99;
      const trail = p99 === undefined ? state.latencyTrail
        : [...state.latencyTrail, p99].slice(-LATENCY_TRAIL);
      return { ...state, latencyTrail: trail, overruns: msg.overruns };
    }
    default:
      return state;
  }
}

/** Connection is healthy while heartbeats are younger than two periods. */
export function heartbeatFresh(state: ConsoleState, now: number, periodMs = 1000): boolean {
  return state.lastHeartbeatAt !== null && now - state.lastHeartbeatAt < 2 * periodMs;
}
