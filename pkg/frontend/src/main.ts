/**
 * DOM assembly for the console. All logic that can live without a DOM sits
 * in the sibling modules; this file only wires them to elements.
 *
 * View convention: the grid is drawn north-up, so grid row 0 (southmost)
 * is the bottom row of pixels and a radar's y in [0,1] maps to
 * (1 - y) * canvas height.
 */

import { ApiClient, ApiError, TerrainDoc } from "./api.js";
import { CoverageMap, GRID, THETA_BINS } from "./bitset.js";
import { historySeries, parseTrajectoryCsv, stepPath, toStepSeries } from "./chart.js";
import { RADAR_SLOTS, SessionState } from "./session.js";
import { altitudeAt, altitudeRange, cellAtPixel, colorFor } from "./terrain.js";
import { SessionTimer, formatClock } from "./timer.js";

const CELL_PX = 16;
const SIZE_PX = CELL_PX * GRID;

const query = new URLSearchParams(location.search);
const sessionId = query.get("session") ?? `s${Math.floor(Math.random() * 1e9)}`;
const minutes = Number(query.get("minutes") ?? "30");
const client = new ApiClient(query.get("api") ?? "", sessionId);
const state = new SessionState();

const $ = (id: string) => document.getElementById(id) as HTMLElement;

let terrainDoc: TerrainDoc | null = null;
let lastMap: CoverageMap | null = null;
let selectedRadar = 0;
let locked = false;
let pendingVector: number[] | null = null;
const algoSeries = new Map<string, { evaluation: number; value: number }[]>();

const timer = new SessionTimer(minutes * 60, onExpiry);

function radarXY(slot: number): { x: number; y: number } {
  const def = RADAR_SLOTS[slot];
  return { x: state.vector[def.ix], y: state.vector[def.iy] };
}

// ---------------------------------------------------------------- rendering

function drawTerrain(): void {
  if (!terrainDoc) return;
  const canvas = $("terrain") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const { min, max } = altitudeRange(terrainDoc);
  for (let iy = 0; iy < GRID; iy++) {
    for (let ix = 0; ix < GRID; ix++) {
      ctx.fillStyle = colorFor(altitudeAt(terrainDoc, ix, iy), min, max);
      ctx.fillRect(ix * CELL_PX, (GRID - 1 - iy) * CELL_PX, CELL_PX, CELL_PX);
    }
  }
}

function drawOverlay(): void {
  const canvas = $("overlay") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, SIZE_PX, SIZE_PX);
  if (!lastMap) return;
  const mode = ($("theta-mode") as HTMLSelectElement).value;
  const cells =
    mode === "aggregate"
      ? lastMap.columnCounts()
      : lastMap.thetaSlice(Number(mode));
  const full = mode === "aggregate" ? THETA_BINS : 1;
  for (let iy = 0; iy < GRID; iy++) {
    for (let ix = 0; ix < GRID; ix++) {
      const n = cells[iy * GRID + ix];
      if (n === 0) continue;
      ctx.fillStyle = `rgba(40,110,255,${(0.65 * n) / full})`;
      ctx.fillRect(ix * CELL_PX, (GRID - 1 - iy) * CELL_PX, CELL_PX, CELL_PX);
    }
  }
}

function placeMarkers(): void {
  RADAR_SLOTS.forEach((def, i) => {
    const el = $(`radar-${i}`);
    const { x, y } = radarXY(i);
    el.style.left = `${x * SIZE_PX - 9}px`;
    el.style.top = `${(1 - y) * SIZE_PX - 9}px`;
    el.classList.toggle("selected", i === selectedRadar);
  });
}

function renderPanel(): void {
  const def = RADAR_SLOTS[selectedRadar];
  $("panel-title").textContent = `radar ${selectedRadar} (${def.kind})`;
  const tilt = $("tilt") as HTMLInputElement;
  tilt.value = String(state.vector[def.itilt]);
  $("tilt-value").textContent = state.vector[def.itilt].toFixed(3);
  const angleRow = $("angle-row");
  if (def.iangle === undefined) {
    angleRow.style.display = "none";
  } else {
    angleRow.style.display = "";
    const angle = $("angle") as HTMLInputElement;
    angle.value = String(state.vector[def.iangle]);
    $("angle-value").textContent =
      `${Math.round(state.vector[def.iangle] * 360)}°`;
  }
}

function renderStats(fitness?: number, covered?: number): void {
  if (fitness !== undefined) $("fitness").textContent = String(fitness);
  if (covered !== undefined) $("covered").textContent = String(covered);
  $("evaluations").textContent = String(state.evaluations);
  $("best").textContent =
    state.bestSoFar === Infinity ? "-" : String(state.bestSoFar);
}

function renderChart(): void {
  const svg = $("chart");
  const human = historySeries(state.history);
  const maxEval = Math.max(
    state.evaluations,
    ...[...algoSeries.values()].map((s) => s[s.length - 1]?.evaluation ?? 1),
    1,
  );
  const all = [human, ...algoSeries.values()].filter((s) => s.length > 0);
  if (all.length === 0) {
    svg.innerHTML = "";
    return;
  }
  const values = all.flatMap((s) => s.map((p) => p.value));
  const minV = Math.min(...values);
  const maxV = Math.max(...values);
  const colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];
  let body = "";
  let ci = 1;
  for (const [algo, series] of algoSeries) {
    const d = stepPath(toStepSeries(series, maxEval), 440, 180, maxEval, minV, maxV);
    body += `<path d="${d}" fill="none" stroke="${colors[ci % colors.length]}" stroke-width="1.5"><title>${algo}</title></path>`;
    ci++;
  }
  if (human.length > 0) {
    const d = stepPath(toStepSeries(human, maxEval), 440, 180, maxEval, minV, maxV);
    body += `<path d="${d}" fill="none" stroke="${colors[0]}" stroke-width="2"><title>you</title></path>`;
  }
  svg.innerHTML = body;
}

// ------------------------------------------------------------- interaction

function commit(): void {
  if (locked) return;
  const vector = [...state.vector];
  pendingVector = vector;
  $("retry-banner").style.display = "none";
  client
    .evaluate(vector)
    .then((doc) => {
      state.applyResult(doc.fitness);
      lastMap = CoverageMap.fromBase64(doc.coverage_map);
      renderStats(doc.fitness, doc.covered);
      drawOverlay();
      renderChart();
    })
    .catch((err) => {
      const banner = $("retry-banner");
      banner.style.display = "";
      $("retry-text").textContent =
        err instanceof ApiError ? `${err.status}: ${err.message}` : "network error";
    });
}

function onExpiry(): void {
  locked = true;
  document
    .querySelectorAll("input, button.locks")
    .forEach((el) => ((el as HTMLInputElement).disabled = true));
  openExport();
}

async function openExport(): Promise<void> {
  const dialog = $("export-dialog") as HTMLDialogElement;
  const text = await client.sessionLog();
  ($("export-text") as HTMLTextAreaElement).value = text;
  const link = $("export-download") as HTMLAnchorElement;
  link.href = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
  link.download = `${sessionId}.dat`;
  dialog.showModal();
}

function wireMarkers(): void {
  const wrap = $("terrain-wrap");
  RADAR_SLOTS.forEach((def, i) => {
    const el = document.createElement("div");
    el.id = `radar-${i}`;
    el.className = `radar ${def.kind}`;
    el.textContent = def.kind === "rotating" ? "R" : "S";
    let dragging = false;
    el.addEventListener("pointerdown", (ev) => {
      selectedRadar = i;
      renderPanel();
      placeMarkers();
      if (locked) return;
      dragging = true;
      el.setPointerCapture(ev.pointerId);
    });
    el.addEventListener("pointermove", (ev) => {
      if (!dragging) return;
      const rect = wrap.getBoundingClientRect();
      state.setParam(def.ix, (ev.clientX - rect.left) / SIZE_PX);
      state.setParam(def.iy, 1 - (ev.clientY - rect.top) / SIZE_PX);
      placeMarkers();
    });
    el.addEventListener("pointerup", () => {
      if (!dragging) return;
      dragging = false;
      commit();
    });
    wrap.appendChild(el);
  });
}

function wirePanel(): void {
  const tilt = $("tilt") as HTMLInputElement;
  tilt.addEventListener("input", () => {
    state.setParam(RADAR_SLOTS[selectedRadar].itilt, Number(tilt.value));
    $("tilt-value").textContent = Number(tilt.value).toFixed(3);
  });
  tilt.addEventListener("change", commit);
  const angle = $("angle") as HTMLInputElement;
  angle.addEventListener("input", () => {
    const ia = RADAR_SLOTS[selectedRadar].iangle;
    if (ia === undefined) return;
    state.setParam(ia, Number(angle.value));
    $("angle-value").textContent = `${Math.round(Number(angle.value) * 360)}°`;
  });
  angle.addEventListener("change", commit);
}

function wireRest(): void {
  $("theta-mode").addEventListener("change", drawOverlay);
  $("retry-button").addEventListener("click", () => {
    if (pendingVector) {
      state.vector = [...pendingVector];
      commit();
    }
  });
  $("export-button").addEventListener("click", openExport);
  $("reset-button").addEventListener("click", async () => {
    await client.reset();
    location.reload();
  });
  const hover = $("hover");
  $("overlay").addEventListener("mousemove", (ev) => {
    if (!terrainDoc) return;
    const rect = ($("overlay") as HTMLCanvasElement).getBoundingClientRect();
    const cell = cellAtPixel(ev.clientX - rect.left, ev.clientY - rect.top, CELL_PX);
    if (!cell) return;
    const iy = GRID - 1 - cell.iy;
    const alt = altitudeAt(terrainDoc, cell.ix, iy);
    hover.textContent = `cell (${cell.ix}, ${iy}): ${alt.toFixed(1)} m`;
  });
  $("compare-add").addEventListener("click", async () => {
    const input = $("compare-algo") as HTMLInputElement;
    const algo = input.value.trim();
    if (!algo) return;
    try {
      algoSeries.set(algo, parseTrajectoryCsv(await client.trajectoryCsv(algo)));
      $("compare-note").textContent = "";
    } catch (err) {
      $("compare-note").textContent =
        err instanceof ApiError ? `no curve for ${algo} (${err.message})` : String(err);
    }
    renderChart();
  });
}

async function init(): Promise<void> {
  terrainDoc = await client.terrain();
  $("instance-name").textContent = terrainDoc.name || "(unnamed)";
  drawTerrain();
  wireMarkers();
  wirePanel();
  wireRest();
  placeMarkers();
  renderPanel();
  renderStats();
  timer.start();
  setInterval(() => {
    timer.tick();
    state.elapsed = timer.elapsedSeconds();
    $("clock").textContent = formatClock(timer.remainingSeconds());
  }, 250);
  commit(); // starting placement counts as the first evaluation
}

init().catch((err) => {
  $("instance-name").textContent = `failed to load: ${err}`;
});
