import { forwardKinematics, reachAnnulus, ReachAnnulus } from './fk.js';
import { MetaMessage, StateMessage, Status, pointToArray } from './protocol.js';

export const STATUS_COLORS: Record<Status, string> = {
  tracking: '#2f9e44',
  detouring: '#e8a33d',
  blocked: '#d64545',
};

/**
 * Uniform world-to-canvas mapping for a workspace box: same scale on
 * both axes, box centered, canvas y pointing down.
 */
export class Viewport {
  readonly scale: number;
  private readonly cx: number;
  private readonly cy: number;

  constructor(
    lo: number[],
    hi: number[],
    readonly width: number,
    readonly height: number,
    margin = 24,
  ) {
    const spanX = hi[0] - lo[0];
    const spanY = hi[1] - lo[1];
    this.scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
    this.cx = (lo[0] + hi[0]) / 2;
    this.cy = (lo[1] + hi[1]) / 2;
  }

  toCanvas(p: number[]): [number, number] {
    return [
      this.width / 2 + (p[0] - this.cx) * this.scale,
      this.height / 2 - (p[1] - this.cy) * this.scale,
    ];
  }

  toWorld(px: number, py: number): [number, number] {
    return [
      this.cx + (px - this.width / 2) / this.scale,
      this.cy - (py - this.height / 2) / this.scale,
    ];
  }
}

/**
 * Whether the server-effective target has drifted off the raw pointer
 * far enough to deserve its own ghost marker.
 */
export function ghostVisible(
  raw: number[] | null,
  effective: number[],
  eps = 1e-6,
): boolean {
  if (raw === null) return false;
  const n = Math.min(raw.length, effective.length);
  let d2 = 0;
  for (let i = 0; i < n; i++) d2 += (raw[i] - effective[i]) ** 2;
  return Math.sqrt(d2) > eps;
}

export interface Snapshot {
  state: StateMessage | null;
  rawTarget: number[] | null;
  connected: boolean;
}

// Everything below touches the canvas and is exercised in the browser,
// not under test; keep logic out of here and in the pure helpers above.
export class SceneRenderer {
  readonly viewport: Viewport;
  private readonly annulus: ReachAnnulus;

  constructor(
    private readonly ctx: CanvasRenderingContext2D,
    private readonly meta: MetaMessage,
    width: number,
    height: number,
  ) {
    this.viewport = new Viewport(meta.workspace.lo, meta.workspace.hi, width, height);
    this.annulus = reachAnnulus(meta.robot);
  }

  draw(snap: Snapshot): void {
    const { ctx, viewport: vp } = this;
    ctx.fillStyle = '#fafafa';
    ctx.fillRect(0, 0, vp.width, vp.height);

    this.drawGrid();
    this.drawWorkspaceBox();
    this.drawAnnulus();

    if (snap.state !== null) {
      this.drawArm(snap.state);
      const effective = pointToArray(snap.state.target_effective);
      if (ghostVisible(snap.rawTarget, effective, 0.5 / vp.scale)) {
        this.drawGhost(effective);
      }
      this.drawStatus(snap.state.status);
    }
    if (snap.rawTarget !== null) {
      this.drawPointer(snap.rawTarget);
    }
    if (!snap.connected) {
      ctx.fillStyle = 'rgba(250, 250, 250, 0.75)';
      ctx.fillRect(0, 0, vp.width, vp.height);
      ctx.fillStyle = '#555';
      ctx.font = '18px system-ui, sans-serif';
      ctx.textAlign = 'center';
      ctx.fillText('disconnected, retrying…', vp.width / 2, vp.height / 2);
    }
  }

  private drawGrid(): void {
    const { ctx, viewport: vp, meta } = this;
    const [lo, hi] = [meta.workspace.lo, meta.workspace.hi];
    ctx.strokeStyle = '#e4e4e4';
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (let x = lo[0]; x <= hi[0] + 1e-9; x += meta.grid_pitch[0]) {
      const [px, top] = vp.toCanvas([x, hi[1]]);
      ctx.moveTo(px, top);
      ctx.lineTo(px, vp.toCanvas([x, lo[1]])[1]);
    }
    for (let y = lo[1]; y <= hi[1] + 1e-9; y += meta.grid_pitch[1]) {
      const [left, py] = vp.toCanvas([lo[0], y]);
      ctx.moveTo(left, py);
      ctx.lineTo(vp.toCanvas([hi[0], y])[0], py);
    }
    ctx.stroke();
  }

  private drawWorkspaceBox(): void {
    const { ctx, viewport: vp, meta } = this;
    const [x0, y0] = vp.toCanvas([meta.workspace.lo[0], meta.workspace.hi[1]]);
    const [x1, y1] = vp.toCanvas([meta.workspace.hi[0], meta.workspace.lo[1]]);
    ctx.strokeStyle = '#888';
    ctx.lineWidth = 1.5;
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
  }

  private drawAnnulus(): void {
    const { ctx, viewport: vp } = this;
    const center = vp.toCanvas(this.annulus.center);
    ctx.strokeStyle = '#b9c8e0';
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    for (const r of [this.annulus.rMin, this.annulus.rMax]) {
      if (r <= 0) continue;
      ctx.beginPath();
      ctx.arc(center[0], center[1], r * vp.scale, 0, 2 * Math.PI);
      ctx.stroke();
    }
    ctx.setLineDash([]);
  }

  private drawArm(state: StateMessage): void {
    const { ctx, viewport: vp, meta } = this;
    const pose = forwardKinematics(meta.robot, state.joints);
    const points = [...pose.joints, pose.ee].map((p) => vp.toCanvas(p));
    ctx.strokeStyle = '#39424e';
    ctx.lineWidth = 5;
    ctx.lineCap = 'round';
    ctx.lineJoin = 'round';
    ctx.beginPath();
    ctx.moveTo(points[0][0], points[0][1]);
    for (const [px, py] of points.slice(1)) ctx.lineTo(px, py);
    ctx.stroke();

    ctx.fillStyle = '#39424e';
    for (const [px, py] of points.slice(0, -1)) {
      ctx.beginPath();
      ctx.arc(px, py, 4, 0, 2 * Math.PI);
      ctx.fill();
    }
    const [ex, ey] = points[points.length - 1];
    ctx.fillStyle = STATUS_COLORS[state.status];
    ctx.beginPath();
    ctx.arc(ex, ey, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  private drawPointer(raw: number[]): void {
    const { ctx, viewport: vp } = this;
    const [px, py] = vp.toCanvas(raw);
    ctx.strokeStyle = '#1f6fd6';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(px - 8, py);
    ctx.lineTo(px + 8, py);
    ctx.moveTo(px, py - 8);
    ctx.lineTo(px, py + 8);
    ctx.stroke();
  }

  private drawGhost(effective: number[]): void {
    const { ctx, viewport: vp } = this;
    const [px, py] = vp.toCanvas(effective);
    ctx.strokeStyle = '#7a7a7a';
    ctx.lineWidth = 2;
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.arc(px, py, 7, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  private drawStatus(status: Status): void {
    const { ctx } = this;
    ctx.fillStyle = STATUS_COLORS[status];
    ctx.beginPath();
    ctx.arc(18, 18, 7, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = '#333';
    ctx.font = '14px system-ui, sans-serif';
    ctx.textAlign = 'left';
    ctx.fillText(status, 32, 23);
  }
}
