import init, { Demo, injection_curve } from "./pkg/ginsew_web.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function axes(ctx, w, h, pad, xmax, ymin, ymax, xlabel, ylabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(xlabel, w / 2, h - 6);
  ctx.fillText(`${ymax.toFixed(2)}`, 2, 18);
  ctx.fillText(`${ymin.toFixed(2)}`, 2, h - pad);
  ctx.fillText(ylabel, 2, h / 2);
  ctx.fillText(`${xmax}`, w - 30, h - pad + 14);
  return {
    x: (v) => pad + (v / xmax) * (w - pad - 8),
    y: (v) => 8 + (1 - (v - ymin) / (ymax - ymin)) * (h - pad - 16),
  };
}

function drawCurve() {
  const eps = parseFloat($("eps-curve").value);
  const q1 = parseFloat($("q1-curve").value);
  $("eps-curve-val").textContent = eps.toFixed(2);
  $("q1-curve-val").textContent = q1.toFixed(2);
  const c = JSON.parse(injection_curve(eps, q1, 400));
  const cv = $("curve"), ctx = cv.getContext("2d");
  const s = axes(ctx, cv.width, cv.height, 40, 1, 0, 1, "hash value t", "Q1");
  ctx.strokeStyle = "#bbb";
  ctx.beginPath(); ctx.moveTo(s.x(0), s.y(q1)); ctx.lineTo(s.x(1), s.y(q1)); ctx.stroke();
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  c.t.forEach((t, i) => (i ? ctx.lineTo(s.x(t), s.y(c.q1[i])) : ctx.moveTo(s.x(t), s.y(c.q1[i]))));
  ctx.stroke();
}

function drawProbe() {
  if (!demo) return;
  const marked = document.querySelector("input[name=student]:checked").value === "marked";
  let r;
  try {
    r = JSON.parse(demo.probe(marked, $("wrong").checked));
  } catch (e) {
    $("snr").textContent = "–";
    $("pairs-info").textContent = String(e);
    return;
  }
  $("snr").textContent = r.p_snr.toFixed(2);
  $("pairs-info").textContent = `(${r.n_pairs_kept} of ${r.n_pairs_total} probe steps with Q1 > 0.6)`;

  const sc = $("scatter"), sx = sc.getContext("2d");
  const s = axes(sx, sc.width, sc.height, 40, 1, 0.6, 1, "hash value t", "Q1");
  sx.fillStyle = "rgba(40, 90, 200, 0.35)";
  for (const [t, y] of r.points) sx.fillRect(s.x(t) - 1, s.y(y) - 1, 2, 2);

  const sp = $("spectrum"), px = sp.getContext("2d");
  const top = Math.max(...r.power) || 1;
  const fmax = r.freqs[r.freqs.length - 1];
  const p = axes(px, sp.width, sp.height, 40, fmax, 0, top, "angular frequency ω", "power");
  px.fillStyle = "rgba(220, 60, 60, 0.12)";
  px.fillRect(p.x(r.fw - r.delta / 2), 8, p.x(r.fw + r.delta / 2) - p.x(r.fw - r.delta / 2), sp.height - 48);
  px.strokeStyle = "#333";
  px.beginPath();
  r.freqs.forEach((f, i) => (i ? px.lineTo(p.x(f), p.y(r.power[i])) : px.moveTo(p.x(f), p.y(r.power[i]))));
  px.stroke();
}

function build() {
  $("status").textContent = "training…";
  setTimeout(() => {
    const t0 = performance.now();
    try {
      if (demo) demo.free();
      demo = new Demo(
        parseInt($("seed").value, 10) >>> 0,
        parseFloat($("eps").value),
        parseInt($("pairs").value, 10),
        parseInt($("probe").value, 10),
      );
      $("status").textContent = `built in ${((performance.now() - t0) / 1000).toFixed(1)} s`;
    } catch (e) {
      demo = null;
      $("status").textContent = String(e);
    }
    drawProbe();
  }, 10);
}

await init();
$("eps-curve").addEventListener("input", drawCurve);
$("q1-curve").addEventListener("input", drawCurve);
$("build").addEventListener("click", build);
document.querySelectorAll("input[name=student]").forEach((el) => el.addEventListener("change", drawProbe));
$("wrong").addEventListener("change", drawProbe);
drawCurve();
build();
