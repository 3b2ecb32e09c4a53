import init, { errorCurve, overlapHistogram, concentrationSamples } from "./pkg/pqsi_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const BUDGETS = new Uint32Array([100, 200, 400, 800, 1600, 3200]);

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = { l: 50, r: 10, t: 10, b: 30 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  return { ctx, X: (u) => pad.l + u * w, Y: (v) => pad.t + (1 - v) * h, pad, w, h };
}

function runErrorCurve() {
  const z = $("ec-z").value.split(",").map(Number);
  const d = num("ec-d"), m = num("ec-m"), trials = num("ec-t");
  const seed = 7n;
  const series = [
    { color: "#1f77b4", e: errorCurve(new Float64Array(z), d, 0, BUDGETS, trials, seed) },
    { color: "#ff7f0e", e: errorCurve(new Float64Array(z), d, m, BUDGETS, trials, seed) },
  ];
  const { ctx, X, Y, pad, h } = frame($("ec"));
  const floor = Math.log10(0.5 / trials);
  const ly = (e) => (Math.log10(Math.max(e, 0.5 / trials)) - floor) / -floor;
  const lx = (i) => i / (BUDGETS.length - 1);
  BUDGETS.forEach((n, i) => ctx.fillText(String(n), X(lx(i)) - 12, pad.t + h + 18));
  for (const k of [0, 1, 2, 3]) {
    const v = 10 ** -k;
    if (Math.log10(v) >= floor) ctx.fillText(v.toString(), 8, Y(ly(v)) + 4);
  }
  for (const { color, e } of series) {
    ctx.strokeStyle = ctx.fillStyle = color;
    ctx.beginPath();
    e.forEach((v, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(lx(i)), Y(ly(v))));
    ctx.stroke();
    e.forEach((v, i) => ctx.fillRect(X(lx(i)) - 3, Y(ly(v)) - 3, 6, 6));
  }
}

function runOverlap() {
  const d = num("ov-d"), n = num("ov-n"), bins = 40;
  const hist = overlapHistogram(d, n, bins, 1n);
  const top = Math.max(d - 1, ...hist) * 1.05;
  const { ctx, X, Y } = frame($("ov"));
  ctx.fillStyle = "#9ecae1";
  hist.forEach((v, i) => {
    const x0 = X(i / bins), x1 = X((i + 1) / bins);
    ctx.fillRect(x0, Y(v / top), x1 - x0 - 1, Y(0) - Y(v / top));
  });
  ctx.strokeStyle = "#d62728";
  ctx.beginPath();
  for (let i = 0; i <= 200; i++) {
    const x = i / 200;
    const y = (d - 1) * (1 - x) ** (d - 2);
    (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(x), Y(y / top));
  }
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("0", X(0), Y(0) + 14);
  ctx.fillText("1", X(1) - 6, Y(0) + 14);
}

function runConcentration() {
  const d = num("cc-d"), r = num("cc-r"), a = num("cc-a");
  const out = concentrationSamples(d, r, a, 2000, 2n);
  const [center, half] = out;
  const ps = out.slice(2);
  const lo = Math.min(center - 1.5 * half, ...ps), hi = Math.max(center + 1.5 * half, ...ps);
  const span = hi - lo || 1;
  const { ctx, X, Y } = frame($("cc"));
  const v = (p) => (p - lo) / span;
  ctx.fillStyle = "rgba(44,160,44,0.15)";
  ctx.fillRect(X(0), Y(v(center + half)), X(1) - X(0), Y(v(center - half)) - Y(v(center + half)));
  ctx.fillStyle = "#333";
  let inside = 0;
  ps.forEach((p, i) => {
    if (Math.abs(p - center) < half + 1e-12) inside++;
    ctx.fillRect(X(i / ps.length), Y(v(p)), 2, 2);
  });
  ctx.fillText(hi.toFixed(3), 4, Y(1) + 10);
  ctx.fillText(lo.toFixed(3), 4, Y(0));
  $("cc-note").textContent =
    `center ${center.toFixed(4)}, half-width ${half.toFixed(4)}, ` +
    `${((100 * inside) / ps.length).toFixed(1)}% of ${ps.length} draws inside the band`;
}

function guarded(fn) {
  return () => {
    try {
      fn();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = `error: ${e.message ?? e}`;
    }
  };
}

await init();
$("status").textContent = "";
for (const [btn, fn] of [["ec-run", runErrorCurve], ["ov-run", runOverlap], ["cc-run", runConcentration]]) {
  const g = guarded(fn);
  $(btn).addEventListener("click", g);
  g();
}
