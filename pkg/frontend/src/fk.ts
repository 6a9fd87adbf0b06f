// Client-side forward kinematics over the geometry the server ships in
// its meta frame, so the arm can be drawn from raw joint values and
// cross-checked against the server's reported end-effector position.

import { RobotGeometry } from './protocol.js';

export interface ArmPose {
  /** World position of each joint, in joint order (3-vectors). */
  joints: number[][];
  /** World position of the tool point (3-vector). */
  ee: number[];
}

type Mat3 = number[][];

// Rodrigues formula for a rotation about a unit axis.
function axisAngle(axis: number[], angle: number): Mat3 {
  const [x, y, z] = axis;
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const C = 1 - c;
  return [
    [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
    [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
    [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
  ];
}

function matMul(a: Mat3, b: Mat3): Mat3 {
  const out: Mat3 = [[0, 0, 0], [0, 0, 0], [0, 0, 0]];
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    }
  }
  return out;
}

function matVec(m: Mat3, v: number[]): number[] {
  return [
    m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
    m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
    m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
  ];
}

function add(a: number[], b: number[]): number[] {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

/**
 * Pose of every joint plus the tool for the given joint values.
 *
 * The chain composes left to right from the base: each joint rotates the
 * running frame about its axis, then the link offset translates to the
 * next joint. A joint's own position is fixed before its rotation
 * applies, so it is recorded first. The tool point is the end-effector
 * offset expressed in the last frame. Planar robots come through the
 * same path with everything in the z = 0 plane.
 */
export function forwardKinematics(robot: RobotGeometry, q: number[]): ArmPose {
  if (q.length !== robot.joints.length) {
    throw new Error(`expected ${robot.joints.length} joint values, got ${q.length}`);
  }
  let R = robot.base_pose.R;
  let origin = robot.base_pose.t;
  const joints: number[][] = [];
  for (let i = 0; i < robot.joints.length; i++) {
    joints.push(origin);
    R = matMul(R, axisAngle(robot.joints[i].axis, q[i]));
    origin = add(origin, matVec(R, robot.joints[i].offset));
  }
  const ee = add(origin, matVec(R, robot.ee_offset.t));
  return { joints, ee };
}

export interface ReachAnnulus {
  center: number[];
  rMin: number;
  rMax: number;
}

/**
 * Necessary-condition reach bounds: the tool stays within rMax of the
 * base, and outside rMin whenever one link is longer than all the others
 * combined (the arm cannot fold back past it).
 */
export function reachAnnulus(robot: RobotGeometry): ReachAnnulus {
  const norm = (v: number[]) => Math.hypot(v[0], v[1], v[2]);
  const segs = robot.joints.map((j) => norm(j.offset));
  segs.push(norm(robot.ee_offset.t));
  const active = segs.filter((s) => s > 0);
  const center = robot.base_pose.t;
  if (active.length === 0) return { center, rMin: 0, rMax: 0 };
  const total = active.reduce((a, b) => a + b, 0);
  const rMin = Math.max(0, 2 * Math.max(...active) - total);
  return { center, rMin, rMax: total };
}
