/**
 * Steering model: keyboard arrows and sliders move the commanded target
 * in 5-degree steps within [-90, 90]; closure runs 0..30; the grasp
 * button flags the next command.  Pure logic, no DOM.
 */

import { CommandMsg } from './protocol.js';

export const STEP_DEG = 5;
export const MIN_DEG = -90;
export const MAX_DEG = 90;
export const MAX_CLOSURE = 30;
export const FLAG_GRASP = 0x01;

export interface SteerState {
  targetDeg: number;
  closure: number;
  mode: number; // 0 none, 1 downsized, 2 pattern
  seq: number;
}

export function initialSteer(mode = 2): SteerState {
  return { targetDeg: 0, closure: 15, mode, seq: 0 };
}

export function clampDeg(deg: number): number {
  return Math.min(MAX_DEG, Math.max(MIN_DEG, deg));
}

export function stepTarget(state: SteerState, steps: number): SteerState {
  return { ...state, targetDeg: clampDeg(state.targetDeg + steps * STEP_DEG) };
}

export function setTarget(state: SteerState, deg: number): SteerState {
  return { ...state, targetDeg: clampDeg(Math.round(deg)) };
}

export function setClosure(state: SteerState, closure: number): SteerState {
  return { ...state, closure: Math.min(MAX_CLOSURE, Math.max(0, Math.round(closure))) };
}

export function setMode(state: SteerState, mode: number): SteerState {
  if (mode !== 0 && mode !== 1 && mode !== 2) return state;
  return { ...state, mode };
}

/** Build the next command; mutates nothing, returns [command, nextState]. */
export function buildCommand(state: SteerState, grasp = false): [CommandMsg, SteerState] {
  const next = { ...state, seq: state.seq + 1 };
  const cmd: CommandMsg = {
    type: 'command',
    seq: next.seq,
    t_us: 0,
    target_tilt_deg: state.targetDeg,
    gripper_pos: state.closure,
    mode: state.mode,
    flags: grasp ? FLAG_GRASP : 0,
  };
  return [cmd, next];
}
