/**
 * Browser wiring: one WebSocket to the local node's JSON mirror, one
 * throttled command channel back.  Everything stateful lives in the
 * pure modules; this file only moves data between them and the DOM.
 */

import { CommandMsg, encodeCommand, parseMirrorMessage, predictionLabel } from './protocol.js';
import { Backoff } from './reconnect.js';
import { makeGrid, paintGrid, sparklinePoints } from './render.js';
import { applyMessage, ConsoleState, heartbeatFresh, initialState, setConnection } from './state.js';
import { buildCommand, initialSteer, setClosure, setMode, setTarget, SteerState, stepTarget } from './steer.js';
import { CommandThrottle } from './throttle.js';

const $ = (id: string) => document.getElementById(id) as HTMLElement;

let state: ConsoleState = initialState();
let steer: SteerState = initialSteer();
let socket: WebSocket | null = null;
let episodeStartedAt: number | null = null;

const backoff = new Backoff();
const throttle = new CommandThrottle<CommandMsg>(60);

function mirrorUrl(): string {
  const input = ($('address') as HTMLInputElement).value.trim();
  return input.startsWith('ws') ? input : `ws://${input}`;
}

function connect(): void {
  state = setConnection(state, 'connecting');
  const ws = new WebSocket(mirrorUrl());
  socket = ws;
  ws.onopen = () => {
    backoff.reset();
    state = setConnection(state, 'connected');
    episodeStartedAt = performance.now();
    sendSteer(false);
  };
  ws.onmessage = (event: MessageEvent) => {
    const msg = parseMirrorMessage(String(event.data));
    if (msg !== null) {
      state = applyMessage(state, msg, performance.now());
      if (msg.type === 'grasp_ack') {
        episodeStartedAt = performance.now(); // next attempt's clock
      }
    }
  };
  ws.onclose = () => {
    if (socket !== ws) return;
    state = setConnection(state, 'disconnected');
    setTimeout(connect, backoff.nextDelay());
  };
  ws.onerror = () => ws.close();
}

function send(cmd: CommandMsg): void {
  if (socket !== null && socket.readyState === WebSocket.OPEN) {
    socket.send(encodeCommand(cmd));
  }
}

function sendSteer(grasp: boolean): void {
  if (state.connection !== 'connected') return; // commands only while connected
  const [cmd, next] = buildCommand(steer, grasp);
  steer = next;
  const out = throttle.offer(cmd, performance.now());
  if (out !== null) send(out);
}

function redraw(): void {
  const drained = throttle.drain(performance.now());
  if (drained !== null) send(drained);

  const now = performance.now();
  const alive = state.connection === 'connected' && heartbeatFresh(state, now);
  $('status').textContent = alive ? 'connected' : state.connection;
  $('status').className = `pill ${alive ? 'ok' : 'bad'}`;

  paintGrid($('grid-thumb'), state.left);
  paintGrid($('grid-index'), state.right);
  $('predicted').textContent = predictionLabel(state.predicted);
  $('target-readout').textContent = `${steer.targetDeg}°`;
  $('closure-readout').textContent = String(steer.closure);
  $('overruns').textContent = String(state.overruns);
  ($('spark') as unknown as SVGPolylineElement).setAttribute(
    'points', sparklinePoints(state.latencyTrail));

  if (episodeStartedAt !== null) {
    $('timer').textContent = `${((now - episodeStartedAt) / 1000).toFixed(1)} s`;
  }
  const ack = state.lastAck;
  if (ack !== null) {
    $('banner').textContent = ack.success
      ? `grasp SUCCEEDED (off by ${(ack.relative_centideg / 100).toFixed(1)}°)`
      : `grasp failed (off by ${(ack.relative_centideg / 100).toFixed(1)}°)`;
    $('banner').className = `banner ${ack.success ? 'ok' : 'bad'}`;
  }
  requestAnimationFrame(redraw);
}

function bindControls(): void {
  const slider = $('target') as HTMLInputElement;
  slider.oninput = () => {
    steer = setTarget(steer, Number(slider.value));
    sendSteer(false);
  };
  const closure = $('closure') as HTMLInputElement;
  closure.oninput = () => {
    steer = setClosure(steer, Number(closure.value));
    sendSteer(false);
  };
  const mode = $('mode') as HTMLSelectElement;
  mode.onchange = () => {
    steer = setMode(steer, Number(mode.value));
    sendSteer(false);
  };
  $('grasp').onclick = () => sendSteer(true);
  window.addEventListener('keydown', (event) => {
    if (event.key === 'ArrowLeft' || event.key === 'ArrowRight') {
      steer = stepTarget(steer, event.key === 'ArrowRight' ? 1 : -1);
      slider.value = String(steer.targetDeg);
      sendSteer(false);
      event.preventDefault();
    } else if (event.key === ' ' || event.key === 'Enter') {
      sendSteer(true);
      event.preventDefault();
    }
  });
  $('connect').onclick = () => {
    if (socket !== null) socket.close();
    connect();
  };
}

makeGrid($('grid-thumb'));
makeGrid($('grid-index'));
bindControls();
connect();
requestAnimationFrame(redraw);
