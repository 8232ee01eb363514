/**
 * JSON mirror protocol: the node re-emits every wire message as a
 * one-line JSON object and accepts Command objects in the same shape.
 * Arrays travel as plain number lists (row-major grids).
 */

export const ELECTRODE_ROWS = 5;
export const ELECTRODE_COLS = 4;
export const NO_PREDICTION = 255;
export const TILT_DEGREES = [-90, -60, -45, -30, 0, 30, 45, 60, 90] as const;

export interface SensorPairMsg {
  type: 'sensor_pair';
  seq: number;
  t_us: number;
  gripper_pos: number;
  left: number[];
  right: number[];
}

export interface ElectrodeMsg {
  type: 'electrode';
  seq: number;
  t_us: number;
  left: number[];   // 20 intensity bytes
  right: number[];
  predicted: number; // class index 0..8, 255 = none
}

export interface HeartbeatMsg {
  type: 'heartbeat';
  seq: number;
  t_us: number;
}

export interface GraspAckMsg {
  type: 'grasp_ack';
  seq: number;
  t_us: number;
  success: boolean;
  relative_centideg: number;
}

export interface StatusMsg {
  type: 'status';
  tick: number;
  mode: number;
  overruns: number;
  dropped_pairs: number;
  latency_ms: { p50?: number; p90?: number; p99?: number; max?: number; mean?: number };
}

export interface CommandMsg {
  type: 'command';
  seq: number;
  t_us: number;
  target_tilt_deg: number;
  gripper_pos: number;
  mode: number;
  flags: number;
}

export type MirrorMessage =
  | SensorPairMsg
  | ElectrodeMsg
  | HeartbeatMsg
  | GraspAckMsg
  | StatusMsg;

function isByteList(value: unknown, length: number): value is number[] {
  return Array.isArray(value) && value.length === length &&
    value.every((v) => typeof v === 'number' && v >= 0 && v <= 255);
}

/** Parse one mirror line; returns null for anything malformed or unknown. */
export function parseMirrorMessage(text: string): MirrorMessage | null {
  let obj: Record<string, unknown>;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== 'object' || obj === null) return null;
  switch (obj.type) {
    case 'electrode':
      if (isByteList(obj.left, 20) && isByteList(obj.right, 20) &&
          typeof obj.predicted === 'number' && typeof obj.seq === 'number') {
        return obj as unknown as ElectrodeMsg;
      }
      return null;
    case 'sensor_pair':
      if (isByteList(obj.left, 100) && isByteList(obj.right, 100) &&
          typeof obj.seq === 'number') {
        return obj as unknown as SensorPairMsg;
      }
      return null;
    case 'heartbeat':
      return typeof obj.seq === 'number' ? (obj as unknown as HeartbeatMsg) : null;
    case 'grasp_ack':
      if (typeof obj.success === 'boolean' && typeof obj.relative_centideg === 'number') {
        return obj as unknown as GraspAckMsg;
      }
      return null;
    case 'status':
      return typeof obj.tick === 'number' ? (obj as unknown as StatusMsg) : null;
    default:
      return null;
  }
}

export function encodeCommand(cmd: CommandMsg): string {
  return JSON.stringify(cmd);
}

export function predictionLabel(predicted: number): string {
  if (predicted === NO_PREDICTION) return '--';
  const deg = TILT_DEGREES[predicted];
  return deg === undefined ? '?' : `${deg > 0 ? '+' : ''}${deg}°`;
}
