// Built bindings come from `wasm-pack build crates/web --target web --out-dir www/pkg`.
import init, { planar_sweep, planar_ik, ur10e_enumeration_count } from "./pkg/reachvox_web.js";

const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const $ = (id) => document.getElementById(id);

let map = null;
let arm = null;
let seed = [0.3, 0.3];
let dragging = false;

function params() {
  return {
    l1: Number($("l1").value),
    l2: Number($("l2").value),
    step: Number($("step").value),
    cell: Number($("cell").value),
    wall: $("wall").checked ? Number($("wallx").value) : undefined,
  };
}

function scale() {
  const p = params();
  return canvas.width / (2 * (p.l1 + p.l2 + 0.1));
}

const toScreen = (x, y) => [canvas.width / 2 + x * scale(), canvas.height / 2 - y * scale()];
const toWorld = (sx, sy) => [(sx - canvas.width / 2) / scale(), (canvas.height / 2 - sy) / scale()];

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (map) {
    const s = map.status;
    const px = map.cell * scale();
    for (let j = 0; j < map.ny; j++) {
      for (let i = 0; i < map.nx; i++) {
        const [x, y] = toScreen(map.origin_x + i * map.cell, map.origin_y + (j + 1) * map.cell);
        ctx.fillStyle = s[j * map.nx + i] ? "rgba(40,160,60,0.45)" : "rgba(200,40,40,0.12)";
        ctx.fillRect(x, y, px, px);
      }
    }
  }
  const p = params();
  if (p.wall !== undefined) {
    const [x0, y0] = toScreen(p.wall, p.l1 + p.l2);
    ctx.fillStyle = "rgba(60,60,60,0.7)";
    ctx.fillRect(x0, y0, 0.1 * scale(), 2 * (p.l1 + p.l2) * scale());
  }
  if (arm) {
    const [bx, by] = toScreen(0, 0);
    const [ex, ey] = toScreen(arm.elbow[0], arm.elbow[1]);
    const [tx, ty] = toScreen(arm.tip[0], arm.tip[1]);
    ctx.strokeStyle = arm.collides ? "#c22" : "#225";
    ctx.lineWidth = 6;
    ctx.lineCap = "round";
    ctx.beginPath();
    ctx.moveTo(bx, by);
    ctx.lineTo(ex, ey);
    ctx.lineTo(tx, ty);
    ctx.stroke();
    const [gx, gy] = toScreen(arm.target[0], arm.target[1]);
    ctx.strokeStyle = arm.converged ? "#2a2" : "#e80";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(gx, gy, 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

function guard(fn) {
  try {
    $("error").textContent = "";
    fn();
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function runSweep() {
  guard(() => {
    const p = params();
    const t0 = performance.now();
    if (map) map.free();
    map = planar_sweep(p.l1, p.l2, p.step, p.cell, p.wall);
    const ms = (performance.now() - t0).toFixed(0);
    const total = map.nx * map.ny;
    $("sweep-out").textContent =
      `${map.reachable_count()} of ${total} voxels reachable, ${map.configs} configurations, ${ms} ms`;
    draw();
  });
}

function solve(ev) {
  guard(() => {
    const r = canvas.getBoundingClientRect();
    const [x, y] = toWorld(ev.clientX - r.left, ev.clientY - r.top);
    const p = params();
    const out = planar_ik(p.l1, p.l2, x, y, seed[0], seed[1], p.wall);
    seed = [out[0], out[1]];
    arm = {
      target: [x, y],
      residual: out[2],
      converged: out[3] === 1,
      collides: out[4] === 1,
      elbow: [out[5], out[6]],
      tip: [out[7], out[8]],
    };
    const deg = (a) => (a * 180 / Math.PI).toFixed(1);
    $("ik-out").textContent =
      `q = (${deg(out[0])}°, ${deg(out[1])}°), residual ${(out[2] * 1000).toFixed(1)} mm` +
      (arm.converged ? "" : ", unreachable") + (arm.collides ? ", collides" : "");
    draw();
  });
}

function count() {
  guard(() => {
    const steps = new Float64Array($("steps5").value.split(",").map(Number));
    const n = ur10e_enumeration_count(steps, $("half").checked);
    $("count-out").textContent = n.toLocaleString("en-US") + " configurations";
  });
}

await init();
$("run").addEventListener("click", runSweep);
$("count").addEventListener("click", count);
canvas.addEventListener("pointerdown", (ev) => { dragging = true; solve(ev); });
canvas.addEventListener("pointermove", (ev) => { if (dragging) solve(ev); });
window.addEventListener("pointerup", () => { dragging = false; });
runSweep();
count();
