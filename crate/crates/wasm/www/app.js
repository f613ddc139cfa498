import init, { presets, simulate_and_discover, coefficient_curve, invariance_table } from "../pkg/lre_wasm.js";

const SVG = "http://www.w3.org/2000/svg";
const $ = (id) => document.getElementById(id);

function el(tag, attrs = {}, text) {
  const e = document.createElementNS(SVG, tag);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  if (text !== undefined) e.textContent = text;
  return e;
}

function showError(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function guarded(fn) {
  return () => {
    showError(null);
    try {
      fn();
    } catch (e) {
      showError(e);
    }
  };
}

// Nodes on a circle, first variable at the top.
function drawGraph(g, title, size = 220) {
  const names = g.names ?? Array.from({ length: g.p }, (_, i) => `x${i + 1}`);
  const r = size / 2 - 30;
  const pos = names.map((_, i) => {
    const t = -Math.PI / 2 + (2 * Math.PI * i) / g.p;
    return [size / 2 + r * Math.cos(t), size / 2 + r * Math.sin(t)];
  });
  const svg = el("svg", { width: size, height: size, viewBox: `0 0 ${size} ${size}` });
  const defs = el("defs");
  const marker = el("marker", { id: `arrow-${title}`, viewBox: "0 0 10 10", refX: 10, refY: 5, markerWidth: 7, markerHeight: 7, orient: "auto" });
  marker.append(el("path", { d: "M0,0 L10,5 L0,10 z", fill: "#333" }));
  defs.append(marker);
  svg.append(defs);
  const nodeR = 15;
  const line = ([a, b], directed) => {
    const [x1, y1] = pos[a];
    const [x2, y2] = pos[b];
    const len = Math.hypot(x2 - x1, y2 - y1);
    const ux = (x2 - x1) / len;
    const uy = (y2 - y1) / len;
    const attrs = {
      x1: x1 + ux * nodeR, y1: y1 + uy * nodeR,
      x2: x2 - ux * nodeR, y2: y2 - uy * nodeR,
      stroke: directed ? "#333" : "#999", "stroke-width": 2,
    };
    if (directed) attrs["marker-end"] = `url(#arrow-${title})`;
    else attrs["stroke-dasharray"] = "5 3";
    svg.append(el("line", attrs));
  };
  g.directed.forEach((e) => line(e, true));
  g.undirected.forEach((e) => line(e, false));
  names.forEach((n, i) => {
    svg.append(el("circle", { cx: pos[i][0], cy: pos[i][1], r: nodeR, fill: "#fff", stroke: "#333" }));
    svg.append(el("text", { x: pos[i][0], y: pos[i][1] + 4, "text-anchor": "middle", "font-size": 12 }, n));
  });
  const fig = document.createElement("figure");
  const cap = document.createElement("figcaption");
  cap.textContent = title;
  fig.append(svg, cap);
  return fig;
}

function discover() {
  const out = JSON.parse(
    simulate_and_discover(
      $("preset").value,
      $("d-changed").value,
      Number($("d-n").value),
      BigInt($("d-seed").value),
      Number($("d-alpha").value),
    ),
  );
  const box = $("d-graphs");
  box.replaceChildren(
    drawGraph(out.truth, "truth"),
    drawGraph(out.essential, "essential graph"),
    drawGraph(out.learned, "learned"),
  );
  const changed = out.changed_estimate.length ? out.changed_estimate.join(", ") : "(none)";
  $("d-info").textContent = `Estimated changed noises: ${changed}. LRE decisions applied: ${out.decisions}.`;
}

function curve() {
  const out = JSON.parse(
    coefficient_curve(
      $("preset").value,
      $("c-target").value,
      $("c-regs").value,
      $("c-varied").value,
      Number($("c-lo").value),
      Number($("c-hi").value),
      60,
    ),
  );
  const w = 520, h = 260, pad = 40;
  const xs = out.variances;
  const all = out.coefficients.flat();
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-9) { lo -= 0.5; hi += 0.5; }
  const sx = (x) => pad + ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);
  const svg = el("svg", { width: w, height: h, viewBox: `0 0 ${w} ${h}` });
  svg.append(el("line", { x1: pad, y1: h - pad, x2: w - pad, y2: h - pad, stroke: "#666" }));
  svg.append(el("line", { x1: pad, y1: pad, x2: pad, y2: h - pad, stroke: "#666" }));
  svg.append(el("text", { x: w / 2, y: h - 8, "text-anchor": "middle", "font-size": 12 }, `noise variance of ${$("c-varied").value}`));
  svg.append(el("text", { x: pad - 4, y: sy(hi) + 4, "text-anchor": "end", "font-size": 11 }, hi.toFixed(2)));
  svg.append(el("text", { x: pad - 4, y: sy(lo) + 4, "text-anchor": "end", "font-size": 11 }, lo.toFixed(2)));
  const colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
  out.coefficients.forEach((series, k) => {
    const pts = series.map((b, i) => `${sx(xs[i])},${sy(b)}`).join(" ");
    const color = colors[k % colors.length];
    svg.append(el("polyline", { points: pts, fill: "none", stroke: color, "stroke-width": 2 }));
    svg.append(el("text", { x: w - pad + 4, y: sy(series[series.length - 1]) + 4, "font-size": 12, fill: color }, out.regressors[k]));
  });
  $("c-plot").replaceChildren(svg);
}

function table() {
  const out = JSON.parse(invariance_table($("preset").value, $("t-changed").value));
  const t = document.createElement("table");
  const head = t.insertRow();
  head.append(document.createElement("th"));
  out.names.forEach((n) => {
    const th = document.createElement("th");
    th.textContent = n;
    head.append(th);
  });
  out.invariant.forEach((row, y) => {
    const tr = t.insertRow();
    const th = document.createElement("th");
    th.textContent = out.names[y];
    tr.append(th);
    row.forEach((v) => {
      const td = tr.insertCell();
      if (v === null) td.textContent = "";
      else {
        td.textContent = v ? "fixed" : "moves";
        td.className = v ? "yes" : "no";
      }
    });
  });
  $("t-table").replaceChildren(t);
}

await init();
for (const name of presets().split(",")) {
  const o = document.createElement("option");
  o.value = o.textContent = name;
  $("preset").append(o);
}
$("preset").value = "chain";
$("d-run").onclick = guarded(discover);
$("c-run").onclick = guarded(curve);
$("t-run").onclick = guarded(table);
guarded(discover)();
guarded(curve)();
guarded(table)();
