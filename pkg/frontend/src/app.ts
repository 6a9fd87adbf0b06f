import { TeleopClient } from './client.js';
import { SceneRenderer } from './render.js';

const params = new URLSearchParams(location.search);
const wsUrl = params.get('ws') ?? `ws://${location.hostname || '127.0.0.1'}:8765/ws`;

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const statusLine = document.getElementById('status')!;
const resetButton = document.getElementById('reset')!;

const client = new TeleopClient(wsUrl);
let renderer: SceneRenderer | null = null;
let rawTarget: number[] | null = null;

client.onMeta = (meta) => {
  renderer = new SceneRenderer(ctx, meta, canvas.width, canvas.height);
};

function pointerTarget(ev: PointerEvent) {
  if (renderer === null) return;
  const rect = canvas.getBoundingClientRect();
  rawTarget = renderer.viewport.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  client.sendTarget(rawTarget);
}

canvas.addEventListener('pointerdown', (ev) => {
  canvas.setPointerCapture(ev.pointerId);
  pointerTarget(ev);
});
canvas.addEventListener('pointermove', (ev) => {
  if (ev.buttons !== 0) pointerTarget(ev);
});

resetButton.addEventListener('click', () => {
  rawTarget = null;
  client.reset();
});

function frame() {
  renderer?.draw({ state: client.lastState, rawTarget, connected: client.connected });
  const state = client.lastState;
  statusLine.textContent = client.connected
    ? (state ? `${state.status}  tick ${state.tick}` : 'connected')
    : 'disconnected';
  requestAnimationFrame(frame);
}

client.start();
requestAnimationFrame(frame);
