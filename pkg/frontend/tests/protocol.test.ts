import { describe, expect, it } from 'vitest';

import {
  parseServerMessage,
  pointToArray,
  resetCommand,
  targetCommand,
} from '../src/protocol.js';

const metaFrame = JSON.stringify({
  type: 'meta',
  robot: {
    planar: true,
    joints: [{ axis: [0, 0, 1], offset: [1, 0, 0], limits: null }],
    links: [{ p0: [0, 0, 0], p1: [1, 0, 0], radius: 0 }],
    base_pose: { R: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], t: [0, 0, 0] },
    ee_offset: { R: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], t: [0, 0, 0] },
  },
  mode: 'position',
  workspace: { lo: [-2, -2], hi: [2, 2] },
  grid_pitch: [0.5, 0.5],
});

const stateFrame = JSON.stringify({
  type: 'state',
  tick: 41,
  joints: [0.1, -0.2],
  ee: { x: 1.0, y: 0.5 },
  status: 'detouring',
  target_effective: { x: 1.2, y: 0.4 },
});

describe('parseServerMessage', () => {
  it('accepts the three server frame types', () => {
    const meta = parseServerMessage(metaFrame);
    expect(meta.type).toBe('meta');
    if (meta.type === 'meta') {
      expect(meta.robot.joints).toHaveLength(1);
      expect(meta.workspace.hi).toEqual([2, 2]);
    }

    const state = parseServerMessage(stateFrame);
    expect(state.type).toBe('state');
    if (state.type === 'state') {
      expect(state.tick).toBe(41);
      expect(state.status).toBe('detouring');
      expect(state.target_effective.y).toBe(0.4);
    }

    const error = parseServerMessage('{"type": "error", "msg": "nope"}');
    expect(error).toEqual({ type: 'error', msg: 'nope' });
  });

  it('rejects frames that are not protocol messages', () => {
    expect(() => parseServerMessage('{oops')).toThrow(/not valid JSON/);
    expect(() => parseServerMessage('[1, 2]')).toThrow();
    expect(() => parseServerMessage('{"type": "telemetry"}')).toThrow(/unknown frame/);
  });

  it('rejects structurally broken frames of a known type', () => {
    const state = JSON.parse(stateFrame);
    for (const wreck of [
      { ...state, joints: 'none' },
      { ...state, ee: { x: 1 } },
      { ...state, status: 'confused' },
      { ...state, tick: null },
    ]) {
      expect(() => parseServerMessage(JSON.stringify(wreck))).toThrow(/state/);
    }
    const meta = JSON.parse(metaFrame);
    delete meta.workspace;
    expect(() => parseServerMessage(JSON.stringify(meta))).toThrow(/meta/);
  });
});

describe('commands', () => {
  it('serializes planar and spatial targets', () => {
    expect(JSON.parse(targetCommand([1.5, -0.25]))).toEqual(
      { type: 'target', x: 1.5, y: -0.25 });
    expect(JSON.parse(targetCommand([0.1, 0.2, 0.3]))).toEqual(
      { type: 'target', x: 0.1, y: 0.2, z: 0.3 });
  });

  it('serializes reset', () => {
    expect(JSON.parse(resetCommand())).toEqual({ type: 'reset' });
  });
});

it('pointToArray keeps the wire dimension', () => {
  expect(pointToArray({ x: 1, y: 2 })).toEqual([1, 2]);
  expect(pointToArray({ x: 1, y: 2, z: 3 })).toEqual([1, 2, 3]);
});
