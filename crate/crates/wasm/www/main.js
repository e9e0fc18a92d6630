import init, {
  compile_timeline, preview_adaptation, personality_curve, bundled_dialog, bundled_timings,
} from "./pkg/gesturec_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = { prep: "#7a9", stroke: "#c43", hold: "#e9a03b", retract: "#789" };

function status(msg) { $("status").textContent = msg || ""; }

// rows: [{label, script}], each script a parsed gesture-script/1 document
function drawTimeline(rows) {
  const c = $("timeline");
  const ctx = c.getContext("2d");
  const lanes = rows.length * 2;
  c.height = 30 + lanes * 26;
  ctx.clearRect(0, 0, c.width, c.height);
  const span = Math.max(...rows.map((r) => r.script.audio_duration));
  const left = 110;
  const x = (t) => left + (t / span) * (c.width - left - 10);
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#666";
  for (let t = 0; t <= span; t += 5) {
    ctx.fillText(`${t}s`, x(t) - 8, 12);
    ctx.fillRect(x(t), 16, 1, c.height - 16);
  }
  rows.forEach((row, i) => {
    ["left", "right"].forEach((arm, j) => {
      const y = 22 + (i * 2 + j) * 26;
      ctx.fillStyle = "#000";
      ctx.fillText(`${row.label} ${arm}`, 4, y + 14);
      for (const e of row.script.events.filter((e) => e.arm === arm)) {
        ctx.fillStyle = COLORS[e.kind];
        ctx.fillRect(x(e.start), y, Math.max(1, x(e.end) - x(e.start)), 20);
      }
    });
  });
}

function strokes(script) {
  return script.events.filter((e) => e.kind === "stroke").length;
}

function run(f) {
  try {
    status("");
    f();
  } catch (e) {
    status(String(e));
  }
}

function compile() {
  run(() => {
    const out = JSON.parse(compile_timeline(
      $("dialog").value, $("timings").value, +$("ea").value, +$("eb").value));
    drawTimeline([
      { label: `A (${strokes(out.scripts.A)})`, script: out.scripts.A },
      { label: `B (${strokes(out.scripts.B)})`, script: out.scripts.B },
    ]);
    status(out.diagnostics.join("\n"));
  });
}

function adapt() {
  run(() => {
    const out = JSON.parse(preview_adaptation($("dialog").value, $("timings").value));
    const responder = (side) => {
      const s = out[side].scripts;
      const last = Math.max(...[...s.A.events, ...s.B.events].map((e) => e.turn));
      return s.A.events.some((e) => e.turn === last) ? s.A : s.B;
    };
    drawTimeline([
      { label: "adapted", script: responder("adapted") },
      { label: "non-adapted", script: responder("nonadapted") },
    ]);
  });
}

function drawCurve() {
  const pts = JSON.parse(personality_curve(25));
  const c = $("curve");
  const ctx = c.getContext("2d");
  const series = [
    ["rate max", (p) => p.params.rate_band.max, "#c43"],
    ["expanse cm", (p) => p.params.expanse_offset_cm, "#37a"],
    ["height cm", (p) => p.params.height_offset_cm, "#7a9"],
    ["outwardness cm", (p) => p.params.outwardness_offset_cm, "#a7c"],
    ["speed x10", (p) => p.params.speed_multiplier * 10, "#e9a03b"],
    ["scale x10", (p) => p.params.scale_multiplier * 10, "#555"],
  ];
  const values = pts.flatMap((p) => series.map(([, f]) => f(p)));
  const lo = Math.min(0, ...values), hi = Math.max(...values);
  const x = (e) => 50 + ((e - 1) / 6) * (c.width - 200);
  const y = (v) => c.height - 25 - ((v - lo) / (hi - lo || 1)) * (c.height - 40);
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#666";
  for (let e = 1; e <= 7; e++) ctx.fillText(String(e), x(e) - 3, c.height - 8);
  series.forEach(([name, f, color], k) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((p, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, x(p.extraversion), y(f(p))));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(name, c.width - 140, 20 + k * 16);
  });
}

await init();
$("dialog").value = bundled_dialog();
$("timings").value = bundled_timings();
for (const id of ["ea", "eb"]) {
  $(id).addEventListener("input", () => { $(`${id}-out`).value = $(id).value; compile(); });
}
$("compile").addEventListener("click", compile);
$("adapt").addEventListener("click", adapt);
drawCurve();
compile();
