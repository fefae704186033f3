import init, { cascadeCurves, sorterHeralds, reflectionSpectrum } from "./pkg/qndsim_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f"];

// Draws series sharing one x axis. `ys` maps a label to an array (nulls leave gaps).
function plot(canvas, xs, ys, { logX = false, yMin = 0, yMax = 1 } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 48, R = 12, T = 10, B = 28;
  ctx.clearRect(0, 0, W, H);
  const fx = logX ? Math.log10 : (x) => x;
  const x0 = fx(xs[0]), x1 = fx(xs[xs.length - 1]);
  const px = (x) => L + ((fx(x) - x0) / (x1 - x0)) * (W - L - R);
  const py = (y) => H - B - ((y - yMin) / (yMax - yMin)) * (H - T - B);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 4; i++) {
    const y = yMin + (i / 4) * (yMax - yMin);
    ctx.fillText(y.toPrecision(2), 4, py(y) + 4);
  }
  const ticks = logX
    ? [0.001, 0.01, 0.1, 1, 10].filter((t) => fx(t) >= x0 && fx(t) <= x1)
    : [0, 0.25, 0.5, 0.75, 1].map((f) => xs[0] + f * (xs[xs.length - 1] - xs[0]));
  for (const t of ticks) ctx.fillText(+t.toPrecision(3), px(t) - 8, H - 10);

  Object.entries(ys).forEach(([, series], i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    let pen = false;
    series.forEach((y, j) => {
      if (y === null || !Number.isFinite(y)) { pen = false; return; }
      const cy = Math.min(Math.max(y, yMin), yMax);
      pen ? ctx.lineTo(px(xs[j]), py(cy)) : ctx.moveTo(px(xs[j]), py(cy));
      pen = true;
    });
    ctx.stroke();
  });
}

function legend(el, names) {
  el.innerHTML = names.map((n, i) => `<span><i style="background:${COLORS[i % COLORS.length]}"></i>${n}</span>`).join("");
}

function wire(formId, compute) {
  const form = document.getElementById(formId);
  const error = document.getElementById(`${formId}-error`);
  const go = (ev) => {
    ev?.preventDefault();
    const f = Object.fromEntries(new FormData(form));
    f.checked = form.querySelector("input[type=checkbox]")?.checked ?? false;
    error.textContent = "";
    try {
      compute(f);
    } catch (e) {
      error.textContent = String(e);
    }
  };
  form.addEventListener("submit", go);
  go();
}

function cascade(f) {
  const data = JSON.parse(cascadeCurves(+f.t, +f.dc1, +f.dc2, +f.lo, +f.hi, +f.n));
  const shown = {
    "P(up1)": data.p_up1,
    "P(up2)": data.p_up2,
    "P(up1 | click)": data.p_up1_given_click,
    "P(up2 | click)": data.p_up2_given_click,
    "P(up1 or up2 | click)": data.p_or_given_click,
    "P(up1 and up2 | click)": data.p_and_given_click,
    "P(up2 | up1, click)": data.p_up2_given_up1_and_click,
  };
  legend(document.getElementById("cascade-legend"), Object.keys(shown));
  plot(document.getElementById("cascade-plot"), data.mu, shown, { logX: true });
}

function sorter(f) {
  const data = JSON.parse(sorterHeralds(+f.k, +f.mean, +f.nmax, f.checked, +f.t));
  const canvas = document.getElementById("sorter-plot");
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, n = data.heralds.length;
  ctx.clearRect(0, 0, W, H);
  const w = (W - 40) / n;
  ctx.font = "11px sans-serif";
  data.heralds.forEach((h, i) => {
    const bh = h.probability * (H - 30);
    ctx.fillStyle = COLORS[0];
    ctx.fillRect(20 + i * w + 4, H - 20 - bh, w - 8, bh);
    ctx.fillStyle = "#333";
    ctx.fillText(String(h.label), 20 + i * w + w / 2 - 4, H - 6);
  });
  const rows = data.heralds
    .map((h) => `<tr><td>${h.label}</td><td>${h.probability.toFixed(6)}</td><td>${h.fidelity === null ? "" : h.fidelity.toFixed(6)}</td></tr>`)
    .join("");
  document.getElementById("sorter-table").innerHTML = `<tr><th>herald</th><th>probability</th><th>fidelity</th></tr>${rows}`;
}

function reflection(f) {
  const data = JSON.parse(reflectionSpectrum(+f.g, +f.kappa, +f.gamma, +f.span, 201));
  const phase = (a) => a.map((p) => (p / Math.PI + 1) / 2);
  const shown = {
    "|r| squared, atom coupled": data.coupled_power,
    "|r| squared, empty cavity": data.uncoupled_power,
    "phase / 2pi + 1/2, coupled": phase(data.coupled_phase),
    "phase / 2pi + 1/2, empty": phase(data.uncoupled_phase),
  };
  legend(document.getElementById("reflection-legend"), [...Object.keys(shown), `C = ${data.cooperativity.toFixed(2)}`]);
  plot(document.getElementById("reflection-plot"), data.detuning, shown);
}

await init();
wire("cascade", cascade);
wire("sorter", sorter);
wire("reflection", reflection);
