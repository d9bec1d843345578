import init, { transmission_curve, wavefunction_profile, ladder_sweep } from "./pkg/double_layer_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// Minimal line plot: series = [{xs, ys, color}], optional log axes.
function plot(canvas, series, { logx = false, logy = false, xlabel = "", ylabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 56, B = 34, T = 10, R = 10;
  ctx.clearRect(0, 0, W, H);
  const fx = (x) => (logx ? Math.log10(x) : x);
  const fy = (y) => (logy ? Math.log10(y) : y);
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) {
    s.xs.forEach((x, i) => {
      const X = fx(x), Y = fy(s.ys[i]);
      if (!isFinite(X) || !isFinite(Y)) return;
      x0 = Math.min(x0, X); x1 = Math.max(x1, X);
      y0 = Math.min(y0, Y); y1 = Math.max(y1, Y);
    });
  }
  if (!isFinite(x0)) return;
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const pad = 0.05 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const px = (X) => L + ((X - x0) / (x1 - x0)) * (W - L - R);
  const py = (Y) => H - B - ((Y - y0) / (y1 - y0)) * (H - B - T);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px system-ui";
  ctx.strokeRect(L, T, W - L - R, H - B - T);
  for (let i = 0; i <= 4; i++) {
    const X = x0 + (i / 4) * (x1 - x0), Y = y0 + (i / 4) * (y1 - y0);
    const xt = logx ? `1e${X.toFixed(1)}` : X.toPrecision(3);
    const yt = logy ? `1e${Y.toFixed(1)}` : Y.toPrecision(3);
    ctx.fillText(xt, px(X) - 14, H - B + 14);
    ctx.fillText(yt, 4, py(Y) + 4);
  }
  ctx.fillText(xlabel, W / 2, H - 4);
  ctx.save(); ctx.translate(12, H / 2); ctx.rotate(-Math.PI / 2); ctx.fillText(ylabel, 0, 0); ctx.restore();

  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.fillStyle = s.color; ctx.lineWidth = 1.5;
    if (s.points) {
      s.xs.forEach((x, i) => {
        const X = fx(x), Y = fy(s.ys[i]);
        if (isFinite(X) && isFinite(Y)) ctx.fillRect(px(X) - 2, py(Y) - 2, 4, 4);
      });
      continue;
    }
    ctx.beginPath();
    let pen = false;
    s.xs.forEach((x, i) => {
      const X = fx(x), Y = fy(s.ys[i]);
      if (!isFinite(X) || !isFinite(Y)) { pen = false; return; }
      pen ? ctx.lineTo(px(X), py(Y)) : ctx.moveTo(px(X), py(Y));
      pen = true;
    });
    ctx.stroke();
  }
}

function structure() {
  return ["v1", "l1", "v2", "l2", "r"].map(num);
}

function guard(f) {
  try {
    $("error").textContent = "";
    f();
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function drawTransmission() {
  const t = transmission_curve(...structure(), 0.0, num("emax"), 600);
  const xs = [], ys = [];
  for (let i = 0; i < t.length; i += 2) { xs.push(t[i]); ys.push(t[i + 1]); }
  plot($("tplot"), [{ xs, ys, color: "#1565c0" }], { xlabel: "E (eV)", ylabel: "|T|²" });
}

function drawWavefunction() {
  const bound = document.querySelector("input[name=mode]:checked").value === "bound";
  const p = JSON.parse(wavefunction_profile(...structure(), bound ? Math.max(0, Math.floor(num("level"))) : -1, num("energy"), 800));
  const vmax = Math.max(...p.potential.map(Math.abs), 1e-9);
  const scaled = p.potential.map((v) => v / vmax);
  plot(
    $("wplot"),
    [
      { xs: p.x, ys: scaled, color: "#bbb" },
      { xs: p.x, ys: p.re, color: "#2e7d32" },
      { xs: p.x, ys: p.abs, color: "#c62828" },
    ],
    { xlabel: "x (nm)", ylabel: "Re φ (green), |φ| (red), V (grey)" },
  );
  const levels = p.levels.map((k) => k.toFixed(4)).join(", ") || "none";
  $("winfo").textContent = `bound levels κ (1/nm): ${levels}; plotted ${p.bound ? "κ" : "k"} = ${p.k.toFixed(5)}`;
}

function drawSweep() {
  const args = ["mu", "nu", "tau", "h1", "d1", "h2", "d2", "c"].map(num);
  const s = JSON.parse(ladder_sweep(...args, num("epsmin"), 4));
  const series = [];
  const depth = Math.max(...s.levels.map((l) => l.length), 0);
  const colors = ["#c62828", "#1565c0", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"];
  for (let j = 0; j < depth; j++) {
    series.push({
      xs: s.eps,
      ys: s.levels.map((l) => (j < l.length ? l[j] : NaN)),
      color: colors[j % colors.length],
      points: true,
    });
  }
  if (s.kappa_limit) series.push({ xs: s.eps, ys: s.eps.map(() => s.kappa_limit), color: "#000" });
  plot($("splot"), series, { logx: true, logy: true, xlabel: "ε", ylabel: "κ (1/nm)" });
  const theta = s.theta == null ? "–" : s.theta.toFixed(4);
  const kl = s.kappa_limit == null ? "–" : s.kappa_limit.toFixed(5);
  $("sinfo").textContent = `region ${s.region}, verdict ${s.verdict}, θ = ${theta}, κ limit = ${kl}, sweep: ${s.scenario}`;
}

await init();
const redraw = () => guard(() => { drawTransmission(); drawWavefunction(); });
for (const el of document.querySelectorAll("#structure input, #emax, #level, #energy, input[name=mode]")) {
  el.addEventListener("input", redraw);
}
$("run").addEventListener("click", () => guard(drawSweep));
redraw();
guard(drawSweep);
