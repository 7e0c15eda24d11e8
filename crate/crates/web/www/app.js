import init, { run_stream, membership_curves, drift_timeline } from "./pkg/dsscn_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = { l: 44, r: 44, t: 10, b: 24 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  ctx.strokeStyle = "#bbb";
  ctx.strokeRect(pad.l, pad.t, w, h);
  return { ctx, pad, w, h };
}

function scale(f, x0, x1, y0, y1) {
  return {
    x: (x) => f.pad.l + ((x - x0) / (x1 - x0 || 1)) * f.w,
    y: (y) => f.pad.t + f.h - ((y - y0) / (y1 - y0 || 1)) * f.h,
  };
}

function line(f, xs, ys, s, color, width = 1.5) {
  f.ctx.strokeStyle = color;
  f.ctx.lineWidth = width;
  f.ctx.beginPath();
  let started = false;
  xs.forEach((x, i) => {
    if (ys[i] == null) return;
    const px = s.x(x), py = s.y(ys[i]);
    if (started) f.ctx.lineTo(px, py); else f.ctx.moveTo(px, py);
    started = true;
  });
  f.ctx.stroke();
  f.ctx.lineWidth = 1;
}

function marks(f, stamps, s, color) {
  f.ctx.strokeStyle = color;
  for (const t of stamps) {
    f.ctx.beginPath();
    f.ctx.moveTo(s.x(t), f.pad.t);
    f.ctx.lineTo(s.x(t), f.pad.t + f.h);
    f.ctx.stroke();
  }
}

function labels(f, text) {
  f.ctx.fillStyle = "#444";
  f.ctx.font = "11px system-ui";
  for (const [x, y, t, align] of text) {
    f.ctx.textAlign = align || "left";
    f.ctx.fillText(t, x, y);
  }
}

function runStream() {
  const status = $("run-status");
  status.textContent = "running...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = JSON.parse(run_stream($("run-dataset").value, num("run-samples"), num("run-seed"), num("run-alpha")));
      const stamps = r.trace.map((row) => row.stamp);
      const last = stamps[stamps.length - 1];
      const maxDepth = Math.max(...r.trace.map((row) => row.depth), 1);
      const f = frame($("run-canvas"));
      const acc = scale(f, 1, last, 0.5, 1);
      const dep = scale(f, 1, last, 0, maxDepth + 1);
      marks(f, r.warning_stamps, acc, "#f5c16c");
      marks(f, r.drift_stamps, acc, "#e6a198");
      line(f, stamps, r.trace.map((row) => row.accuracy), acc, "#1f5fbf");
      line(f, stamps, r.trace.map((row) => row.depth), dep, "#2a8a3a", 2);
      labels(f, [
        [f.pad.l - 4, acc.y(1) + 4, "1.0", "right"],
        [f.pad.l - 4, acc.y(0.5), "0.5", "right"],
        [f.pad.l + f.w + 4, dep.y(maxDepth) + 4, String(maxDepth)],
        [f.pad.l, f.pad.t + f.h + 16, "stamp 1"],
        [f.pad.l + f.w, f.pad.t + f.h + 16, `stamp ${last}`, "right"],
      ]);
      const ms = (performance.now() - t0).toFixed(0);
      status.textContent = `accuracy ${r.accuracy.toFixed(4)}, ${r.final_depth} layers, ${r.final_nodes} nodes, drifts at [${r.drift_stamps.join(", ")}], ${ms} ms`;
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
    }
  }, 10);
}

const palette = ["#1f5fbf", "#c0392b", "#2a8a3a", "#8e44ad", "#e08e0b", "#16a085", "#7f8c8d", "#d35400"];

function drawMemberships() {
  const status = $("mf-status");
  status.textContent = "training...";
  setTimeout(() => {
    try {
      const c = JSON.parse(membership_curves($("run-dataset").value, num("run-samples"), num("run-seed"), num("mf-layer"), num("mf-feature")));
      const f = frame($("mf-canvas"));
      const s = scale(f, c.xs[0], c.xs[c.xs.length - 1], 0, 1);
      c.upper.forEach((up, k) => {
        const color = palette[k % palette.length];
        f.ctx.fillStyle = color + "33";
        f.ctx.beginPath();
        c.xs.forEach((x, i) => (i ? f.ctx.lineTo(s.x(x), s.y(up[i])) : f.ctx.moveTo(s.x(x), s.y(up[i]))));
        for (let i = c.xs.length - 1; i >= 0; i--) f.ctx.lineTo(s.x(c.xs[i]), s.y(c.lower[k][i]));
        f.ctx.closePath();
        f.ctx.fill();
        line(f, c.xs, up, s, color);
      });
      labels(f, [
        [f.pad.l - 4, s.y(1) + 4, "1", "right"],
        [f.pad.l - 4, s.y(0), "0", "right"],
        [f.pad.l, f.pad.t + f.h + 16, String(c.xs[0])],
        [f.pad.l + f.w, f.pad.t + f.h + 16, String(c.xs[c.xs.length - 1]), "right"],
      ]);
      status.textContent = `${c.upper.length} nodes in layer ${c.layer}, feature ${c.feature}`;
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
    }
  }, 10);
}

function drawTimeline() {
  for (const id of ["dt-before", "dt-after", "dt-ramp", "dt-ad", "dt-aw"]) $(`${id}-v`).textContent = $(id).value;
  try {
    const pts = JSON.parse(drift_timeline(num("dt-before"), num("dt-after"), 40, num("dt-ramp"), 100, 500, num("dt-seed"), num("dt-ad"), num("dt-aw")));
    const xs = pts.map((p) => p.chunk);
    const top = Math.max(0.05, ...pts.map((p) => Math.max(p.dist, Number.isFinite(p.eps_drift) ? p.eps_drift : 0)));
    const f = frame($("dt-canvas"));
    const s = scale(f, 1, xs.length, 0, top * 1.1);
    marks(f, pts.filter((p) => p.status === "WARNING").map((p) => p.chunk), s, "#f5c16c");
    marks(f, pts.filter((p) => p.status === "DRIFT").map((p) => p.chunk), s, "#e6a198");
    const finite = (v) => (Number.isFinite(v) ? v : null);
    line(f, xs, pts.map((p) => finite(p.eps_drift)), s, "#c0392b");
    line(f, xs, pts.map((p) => finite(p.eps_warning)), s, "#e08e0b");
    line(f, xs, pts.map((p) => p.dist), s, "#555", 2);
    labels(f, [
      [f.pad.l, f.pad.t + f.h + 16, "chunk 1"],
      [s.x(40), f.pad.t + f.h + 16, "rate starts moving", "center"],
      [f.pad.l + f.w, f.pad.t + f.h + 16, "chunk 100", "right"],
    ]);
    const count = (st) => pts.filter((p) => p.status === st).length;
    $("dt-status").textContent = `${count("DRIFT")} DRIFT, ${count("WARNING")} WARNING verdicts`;
  } catch (e) {
    $("dt-status").textContent = `error: ${e.message ?? e}`;
  }
}

await init();
$("run-go").addEventListener("click", runStream);
$("mf-go").addEventListener("click", drawMemberships);
for (const id of ["dt-before", "dt-after", "dt-ramp", "dt-ad", "dt-aw", "dt-seed"]) $(id).addEventListener("input", drawTimeline);
drawTimeline();
runStream();
