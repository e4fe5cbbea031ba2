import init, { transform_table, membership_tails, sandwich } from "./pkg/absum_wasm.js";

const SERIES = {
  "alternating": { family: "alternating" },
  "geometric 1/2": { family: "geometric", ratio: 0.5 },
  "all ones": { family: "power", decay: 0.0 },
  "1/v²": { family: "power", decay: 2.0 },
  "unit basis e¹": { family: "unit_basis", index: 1 },
  "bounded partial sums: sine": { family: "bounded_partial_sums", generator: { kind: "sine", frequency: 1.0 } },
  "bounded partial sums: ±1": { family: "bounded_partial_sums", generator: { kind: "alternating_sign" } },
};

const WEIGHTS = {
  "unit": { family: "unit" },
  "arithmetic 1, 2, 3, …": { family: "arithmetic", first: 1.0, step: 1.0 },
  "geometric ratio 1.5": { family: "geometric", first: 1.0, ratio: 1.5 },
};

const $ = (id) => document.getElementById(id);

function fill(select, options) {
  for (const name of Object.keys(options)) {
    select.add(new Option(name, name));
  }
}

function guard(out, f) {
  out.classList.remove("err");
  try {
    f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function drawTable() {
  guard($("t-out"), () => {
    const series = JSON.stringify(SERIES[$("t-series").value]);
    const weights = JSON.stringify(WEIGHTS[$("t-weights").value]);
    const t = JSON.parse(transform_table(series, weights, +$("t-m").value, +$("t-n").value));
    const c = $("t-canvas");
    const ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    const h = c.height / t.rows.length;
    const w = c.width / t.rows[0].length;
    const scale = t.max_abs > 0 ? t.max_abs : 1;
    t.rows.forEach((row, m) => {
      row.forEach((x, n) => {
        const a = Math.sqrt(Math.abs(x) / scale);
        ctx.fillStyle = x >= 0 ? `rgba(200,40,40,${a})` : `rgba(40,80,200,${a})`;
        ctx.fillRect(n * w, m * h, Math.ceil(w), Math.ceil(h));
      });
    });
    $("t-out").textContent = `max |F| = ${t.max_abs.toExponential(4)}  (red positive, blue negative, square-root scale)`;
  });
}

function plotTails() {
  guard($("m-out"), () => {
    const series = JSON.stringify(SERIES[$("m-series").value]);
    const r = JSON.parse(membership_tails(series, +$("m-k").value, +$("m-m").value, +$("m-n").value));
    const pts = r.grid.map((m, i) => [Math.max(m, 1), r.sup_tails[i]]).filter(([, y]) => y > 0);
    const c = $("m-canvas");
    const ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    if (pts.length > 0) {
      const lx = pts.map(([x]) => Math.log10(x));
      const ly = pts.map(([, y]) => Math.log10(y));
      const [x0, x1] = [Math.min(...lx), Math.max(...lx) || 1];
      const [y0, y1] = [Math.min(...ly), Math.max(...ly)];
      const px = (x) => 40 + ((x - x0) / (x1 - x0 || 1)) * (c.width - 60);
      const py = (y) => c.height - 30 - ((y - y0) / (y1 - y0 || 1)) * (c.height - 50);
      ctx.strokeStyle = "#888";
      ctx.strokeRect(40, 20, c.width - 60, c.height - 50);
      ctx.fillStyle = "#333";
      ctx.fillText(`1e${y1.toFixed(1)}`, 2, 24);
      ctx.fillText(`1e${y0.toFixed(1)}`, 2, c.height - 30);
      ctx.fillText(`M = ${Math.round(10 ** x1)}`, c.width - 90, c.height - 10);
      ctx.strokeStyle = "#c33";
      ctx.beginPath();
      lx.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ly[i])) : ctx.moveTo(px(x), py(ly[i]))));
      ctx.stroke();
    }
    const fmt = (v) => (v == null ? "none" : v.toExponential(3));
    $("m-out").textContent =
      `verdict ${r.verdict}\n` +
      `pass cut ${r.pass_cut ?? "none"}, extrapolated tail ${fmt(r.extrapolated_tail)}\n` +
      `dyadic decay ratios ${r.decay_ratios.map(fmt).join(" ")}\n` +
      `growth under 2x and 4x windows ${r.growth.map(fmt).join(" ")}`;
  });
}

function evaluateSandwich() {
  guard($("s-out"), () => {
    const lines = $("s-data").value.trim().split("\n").filter((l) => l.trim());
    const rows = lines.map((l) => l.trim().split(/[\s,]+/).map(Number));
    const cols = rows.length ? rows[0].length : 0;
    if (rows.some((r) => r.length !== cols || r.some(Number.isNaN))) {
      throw new Error("every row needs the same number of numeric entries");
    }
    const exps = $("s-exp").value.split(/[\s,]+/).filter(Boolean).map(Number);
    const r = JSON.parse(sandwich(rows.length, cols, new Float64Array(rows.flat()), new Float64Array(exps)));
    $("s-out").textContent =
      `U = ${r.upper.toPrecision(8)}\nL = ${r.lower.toPrecision(8)}  (rows ${r.rows.join(", ") || "none"})\n` +
      `U/(4C²) = ${r.lower_bound.toPrecision(8)}  with C = ${r.c}\n` +
      (r.holds ? "bounds hold" : "bounds VIOLATED");
  });
}

await init();
fill($("t-series"), SERIES);
fill($("m-series"), SERIES);
fill($("t-weights"), WEIGHTS);
$("m-series").value = "bounded partial sums: sine";
$("t-go").onclick = drawTable;
$("m-go").onclick = plotTails;
$("s-go").onclick = evaluateSandwich;
drawTable();
plotTails();
evaluateSandwich();
