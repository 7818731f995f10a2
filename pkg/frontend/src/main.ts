/** Single-page wiring: drawing canvas, job submission, live watch view,
 * metrics panel, and the max-speed comparison table. */

import { ApiClient, StreamEvent, subscribeStream } from "./api.js";
import { overlayDots, parseTrajectory } from "./overlay.js";
import { StrokeCapture, toDocument } from "./strokes.js";
import { ComparisonTable, UiStateMachine } from "./state.js";

const CANVAS_W = 200;
const CANVAS_H = 300;
const SCALE_M_PER_PX = 0.001;
const ANCHOR_M: [number, number] = [-0.1, 0.3];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  const capture = new StrokeCapture();
  const ui = new UiStateMachine();
  const comparison = new ComparisonTable();

  const canvas = el<HTMLCanvasElement>("draw");
  canvas.width = CANVAS_W;
  canvas.height = CANVAS_H;
  const ctx = canvas.getContext("2d")!;
  const status = el<HTMLElement>("status");
  const metricsPre = el<HTMLElement>("metrics");
  const renderImg = el<HTMLImageElement>("render");
  const liveCanvas = el<HTMLCanvasElement>("live");
  liveCanvas.width = CANVAS_W;
  liveCanvas.height = CANVAS_H;
  const liveCtx = liveCanvas.getContext("2d")!;
  const speedSlider = el<HTMLInputElement>("max-speed");
  const compareBody = el<HTMLElement>("comparison");

  function redraw(): void {
    ctx.clearRect(0, 0, CANVAS_W, CANVAS_H);
    ctx.fillStyle = "#111";
    const all = capture.active
      ? [...capture.strokes, { samples: [...capture.active] }]
      : capture.strokes;
    for (const s of all) {
      for (const p of s.samples) {
        const r = 1 + 5 * p.pressure;
        ctx.beginPath();
        ctx.arc(p.x, p.y, r, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  }

  function canvasPos(ev: PointerEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  }

  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const [x, y] = canvasPos(ev);
    capture.begin(x, y, ev.pressure, ev.timeStamp);
    redraw();
  });
  canvas.addEventListener("pointermove", (ev) => {
    const [x, y] = canvasPos(ev);
    capture.extend(x, y, ev.pressure, ev.timeStamp);
    redraw();
  });
  canvas.addEventListener("pointerup", () => {
    capture.commit();
    redraw();
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    capture.undo();
    redraw();
  });
  el<HTMLButtonElement>("clear").addEventListener("click", () => {
    capture.clear();
    redraw();
  });

  function setStatus(text: string): void {
    status.textContent = text;
  }

  function drawOverlay(trajText: string): void {
    const dots = overlayDots(parseTrajectory(trajText));
    liveCtx.clearRect(0, 0, CANVAS_W, CANVAS_H);
    liveCtx.fillStyle = "#9ad";
    for (const d of dots) {
      // wall coords: horizontal = -y, vertical = z (image convention)
      const x = (-d.p[1] - ANCHOR_M[0]) / SCALE_M_PER_PX;
      const y = (ANCHOR_M[1] - d.p[2]) / SCALE_M_PER_PX;
      liveCtx.fillRect(x, y, 1.5, 1.5);
    }
  }

  function drawTip(ev: StreamEvent): void {
    if (ev.pen_width <= 0) return;
    const x = (-ev.tip[1] - ANCHOR_M[0]) / SCALE_M_PER_PX;
    const y = (ANCHOR_M[1] - ev.tip[2]) / SCALE_M_PER_PX;
    liveCtx.fillStyle = "#c22";
    liveCtx.beginPath();
    liveCtx.arc(x, y, ev.pen_width / 2 / SCALE_M_PER_PX, 0, 2 * Math.PI);
    liveCtx.fill();
  }

  async function runJob(label: string, maxSpeed: number | null): Promise<void> {
    ui.submit();
    setStatus("submitting...");
    try {
      const doc = toDocument(capture.strokes, {
        widthPx: CANVAS_W,
        heightPx: CANVAS_H,
        scaleMPerPx: SCALE_M_PER_PX,
        anchorM: ANCHOR_M,
      });
      const id = await api.createJob(
        doc,
        maxSpeed === null ? {} : { maxSpeed },
      );
      ui.jobCreated(id);
      setStatus("planning...");
      let state = await api.waitFor(id, ["planned"]);
      ui.update(state);
      if (state.stage === "failed") {
        setStatus(`plan failed: ${ui.error ?? ""} — edit and retry`);
        ui.editAgain();
        return;
      }
      drawOverlay(await api.trajectoryText(id));
      setStatus("simulating...");
      await api.simulate(id);
      const source = new EventSource(api.streamUrl(id));
      await new Promise<void>((resolve) => {
        subscribeStream(source, drawTip, resolve);
      });
      state = await api.waitFor(id, ["done"]);
      ui.update(state);
      if (state.stage === "failed") {
        setStatus(`simulation failed: ${ui.error ?? ""}`);
        ui.editAgain();
        return;
      }
      const metrics = await api.metricsText(id);
      metricsPre.textContent = metrics; // verbatim service payload
      renderImg.src = api.renderUrl(id);
      comparison.add(label, maxSpeed, metrics);
      renderComparison();
      setStatus("done");
      ui.editAgain();
    } catch (err) {
      setStatus(String(err));
      ui.editAgain();
    }
  }

  function renderComparison(): void {
    compareBody.innerHTML = "";
    for (const row of comparison.rows) {
      const tr = document.createElement("tr");
      const iou = (JSON.parse(row.metricsText) as { iou: number }).iou;
      tr.innerHTML = `<td>${row.label}</td><td>${
        row.maxSpeed ?? "default"
      }</td><td>${iou}</td>`;
      compareBody.appendChild(tr);
    }
  }

  el<HTMLButtonElement>("run").addEventListener("click", () => {
    void runJob(`run ${comparison.rows.length + 1}`, null);
  });
  el<HTMLButtonElement>("run-speed").addEventListener("click", () => {
    const v = Number(speedSlider.value);
    void runJob(`speed ${v}`, v);
  });

  redraw();
}

declare global {
  interface Window {
    wallscribeBoot: typeof boot;
  }
}
if (typeof window !== "undefined") {
  window.wallscribeBoot = boot;
}
