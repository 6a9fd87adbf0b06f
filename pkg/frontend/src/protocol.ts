// Message shapes for the teleop service websocket protocol.
//
// The server speaks three message types: one `meta` on connect, then a
// `state` per control tick, with `error` replies to malformed input.
// Clients send `target` and `reset`.

export interface JointSpec {
  axis: number[];
  offset: number[];
  limits: [number, number] | null;
}

export interface CapsuleSpec {
  p0: number[];
  p1: number[];
  radius: number;
}

export interface PoseSpec {
  R: number[][];
  t: number[];
}

export interface RobotGeometry {
  planar: boolean;
  joints: JointSpec[];
  links: CapsuleSpec[];
  base_pose: PoseSpec;
  ee_offset: PoseSpec;
}

export interface MetaMessage {
  type: 'meta';
  robot: RobotGeometry;
  mode: string;
  workspace: { lo: number[]; hi: number[] };
  grid_pitch: number[];
}

export type Status = 'tracking' | 'detouring' | 'blocked';

export interface WirePoint {
  x: number;
  y: number;
  z?: number;
}

export interface StateMessage {
  type: 'state';
  tick: number;
  joints: number[];
  ee: WirePoint;
  status: Status;
  target_effective: WirePoint;
}

export interface ErrorMessage {
  type: 'error';
  msg: string;
}

export type ServerMessage = MetaMessage | StateMessage | ErrorMessage;

const STATUSES = new Set(['tracking', 'detouring', 'blocked']);

function isNumberArray(v: unknown): v is number[] {
  return Array.isArray(v) && v.every((x) => typeof x === 'number' && isFinite(x));
}

function isWirePoint(v: unknown): v is WirePoint {
  if (typeof v !== 'object' || v === null) return false;
  const p = v as Record<string, unknown>;
  if (typeof p.x !== 'number' || typeof p.y !== 'number') return false;
  return p.z === undefined || typeof p.z === 'number';
}

/** Convert a wire point to a coordinate array ([x, y] or [x, y, z]). */
export function pointToArray(p: WirePoint): number[] {
  return p.z === undefined ? [p.x, p.y] : [p.x, p.y, p.z];
}

/**
 * Parse one frame from the server. Throws on anything that does not
 * match the protocol, so callers surface garbage instead of rendering it.
 */
export function parseServerMessage(raw: string): ServerMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new Error('frame is not valid JSON');
  }
  if (typeof doc !== 'object' || doc === null) {
    throw new Error('frame is not an object');
  }
  const msg = doc as Record<string, unknown>;
  switch (msg.type) {
    case 'meta': {
      const robot = msg.robot as RobotGeometry | undefined;
      const workspace = msg.workspace as MetaMessage['workspace'] | undefined;
      if (
        !robot || typeof robot.planar !== 'boolean' ||
        !Array.isArray(robot.joints) || !Array.isArray(robot.links) ||
        !workspace || !isNumberArray(workspace.lo) || !isNumberArray(workspace.hi) ||
        typeof msg.mode !== 'string' || !isNumberArray(msg.grid_pitch)
      ) {
        throw new Error('malformed meta frame');
      }
      return msg as unknown as MetaMessage;
    }
    case 'state': {
      if (
        typeof msg.tick !== 'number' || !isNumberArray(msg.joints) ||
        !isWirePoint(msg.ee) || !isWirePoint(msg.target_effective) ||
        !STATUSES.has(msg.status as string)
      ) {
        throw new Error('malformed state frame');
      }
      return msg as unknown as StateMessage;
    }
    case 'error': {
      if (typeof msg.msg !== 'string') throw new Error('malformed error frame');
      return msg as unknown as ErrorMessage;
    }
    default:
      throw new Error(`unknown frame type ${JSON.stringify(msg.type)}`);
  }
}

/** Serialize a target command for the given workspace coordinates. */
export function targetCommand(coords: number[]): string {
  const cmd: Record<string, unknown> = { type: 'target', x: coords[0], y: coords[1] };
  if (coords.length > 2) cmd.z = coords[2];
  return JSON.stringify(cmd);
}

export function resetCommand(): string {
  return JSON.stringify({ type: 'reset' });
}
