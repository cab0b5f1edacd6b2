import init, { solve_trace, sectional_map, geodesic_profile, version } from "./pkg/einstein_demo.js";

const $ = (id) => document.getElementById(id);

function tensorParams() {
  return {
    kind: $("kind").value,
    n: Number($("n").value),
    kappa: Number($("kappa").value),
    eps: Number($("eps").value),
    seed: Number($("seed").value),
  };
}

function report(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.classList.toggle("error", isError);
}

// Line plot with simple axes; `ys` may be log-scaled by the caller.
function plotLine(canvas, xs, ys, { xLabel, yLabel, marker } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 44;
  ctx.clearRect(0, 0, w, h);
  const finite = ys.filter(Number.isFinite);
  if (finite.length === 0) return;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...finite), Math.max(...finite)];
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(y1.toPrecision(4), 2, pad + 4);
  ctx.fillText(y0.toPrecision(4), 2, h - pad);
  ctx.fillText(String(x0), pad, h - pad + 14);
  ctx.fillText(String(x1), w - pad - 20, h - pad + 14);
  if (xLabel) ctx.fillText(xLabel, w / 2 - 20, h - 8);
  if (yLabel) ctx.fillText(yLabel, pad, pad - 8);

  ctx.strokeStyle = "#1f5fbf";
  ctx.lineWidth = 2;
  ctx.beginPath();
  let started = false;
  xs.forEach((x, i) => {
    if (!Number.isFinite(ys[i])) return;
    if (started) ctx.lineTo(px(x), py(ys[i]));
    else { ctx.moveTo(px(x), py(ys[i])); started = true; }
  });
  ctx.stroke();

  if (marker !== undefined) {
    ctx.strokeStyle = "#c33";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(pad, py(marker));
    ctx.lineTo(w - pad, py(marker));
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

// Diverging colour map: blue for negative, red for positive, white at zero.
function colour(value, scale) {
  const s = Math.max(-1, Math.min(1, value / scale));
  const a = Math.round(255 * (1 - Math.abs(s)));
  return s >= 0 ? [255, a, a] : [a, a, 255];
}

// Polar projection of the upper hemisphere: radius = θ, angle = φ.
function drawMap(canvas, values, res, scale) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const img = ctx.createImageData(w, h);
  const r0 = Math.min(w, h) / 2 - 2;
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const dx = x - w / 2, dy = y - h / 2;
      const rho = Math.hypot(dx, dy) / r0;
      const k = 4 * (y * w + x);
      if (rho > 1) { img.data[k + 3] = 0; continue; }
      const i = Math.min(res - 1, Math.floor(rho * res));
      let phi = Math.atan2(dy, dx);
      if (phi < 0) phi += 2 * Math.PI;
      const j = Math.floor((phi / (2 * Math.PI)) * res) % res;
      const [r, g, b] = colour(values[i * res + j], scale);
      img.data[k] = r; img.data[k + 1] = g; img.data[k + 2] = b; img.data[k + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

function runTrace() {
  const p = tensorParams();
  try {
    const out = JSON.parse(solve_trace(p.kind, p.n, p.kappa, p.eps, p.seed, $("newton").checked));
    const rMin = out.r_trace[out.r_trace.length - 1];
    const gap = out.r_trace.map((r) => Math.log10(Math.max(r - rMin, 1e-16)));
    plotLine($("trace"), gap.map((_, i) => i), gap, { xLabel: "iteration", yLabel: "log10(R - R_min)" });
    report(
      "trace-status",
      `converged: ${out.converged}, iterations: ${out.iterations} (${out.newton_steps} Newton), ` +
        `λ = ${out.lambda.toPrecision(12)}, |grad| = ${out.grad_norm.toExponential(2)}\n` +
        `eigenvalues of the Einstein metric: ${out.eigenvalues.map((e) => e.toPrecision(5)).join(", ")}`,
    );
  } catch (e) {
    report("trace-status", String(e), true);
  }
}

function runMap() {
  const p = tensorParams();
  const res = Number($("resolution").value);
  try {
    const out = JSON.parse(sectional_map(p.kind, p.kappa, p.eps, p.seed, res));
    const scale = Math.max(...out.identity.map(Math.abs), ...out.einstein.map(Math.abs)) || 1;
    drawMap($("map-identity"), out.identity, res, scale);
    drawMap($("map-einstein"), out.einstein, res, scale);
    const range = (v) => `[${Math.min(...v).toPrecision(4)}, ${Math.max(...v).toPrecision(4)}]`;
    report(
      "map-status",
      `identity K ∈ ${range(out.identity)}, Einstein K ∈ ${range(out.einstein)}, sign changes: ${out.sign_changes}`,
    );
  } catch (e) {
    report("map-status", String(e), true);
  }
}

function runProfile() {
  const p = tensorParams();
  try {
    const out = JSON.parse(
      geodesic_profile(p.kind, p.n, p.kappa, p.eps, p.seed, Number($("direction").value), Number($("tmax").value), 201),
    );
    plotLine($("profile"), out.t, out.r, { xLabel: "t", yLabel: "R(γ(t))", marker: out.r_min });
    report("profile-status", `R at the Einstein metric: ${out.r_min.toPrecision(12)} (dashed line)`);
  } catch (e) {
    report("profile-status", String(e), true);
  }
}

await init();
document.title += ` (v${version()})`;
$("run-trace").addEventListener("click", runTrace);
$("run-map").addEventListener("click", runMap);
$("run-profile").addEventListener("click", runProfile);
runTrace();
runMap();
runProfile();
