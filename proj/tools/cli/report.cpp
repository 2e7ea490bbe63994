#include "report.hpp"

namespace survcontour::cli {

namespace {

// "</" would end the enclosing script element; "<\/" is the same JSON string.
std::string embed(const std::string& json) {
  std::string out;
  out.reserve(json.size());
  for (std::size_t i = 0; i < json.size(); ++i) {
    out += json[i];
    if (json[i] == '<' && i + 1 < json.size() && json[i + 1] == '/') out += '\\';
  }
  return out;
}

constexpr const char* kHead = R"(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>survcontour report</title>
<style>
body { font-family: system-ui, sans-serif; margin: 2rem; color: #222; }
.panel { display: inline-block; margin: 0 1.5rem 1.5rem 0; vertical-align: top; }
canvas { border: 1px solid #ccc; }
#readout { font-family: monospace; min-height: 1.2em; }
table { border-collapse: collapse; }
td, th { border: 1px solid #ddd; padding: 0.25rem 0.6rem; text-align: right; }
</style>
</head>
<body>
<h1>Contour report</h1>
<p id="subtitle"></p>
<p id="readout">Hover over a surface to read the predicted probability.</p>
<div id="surfaces"></div>
<h2>Quantile curves</h2>
<div id="curves"></div>
<h2>Metrics</h2>
<table id="metrics"></table>
<h2>Ingestion</h2>
<pre id="ingest"></pre>
)";

constexpr const char* kScript = R"(<script>
const load = id => JSON.parse(document.getElementById(id).textContent);
const surface = load('contour'), quantiles = load('quantiles'), metrics = load('metrics');
document.getElementById('ingest').textContent = JSON.stringify(load('ingest'), null, 2);
document.getElementById('subtitle').textContent =
  `${surface.family} model, ${surface.outcome_kind} of ${surface.predictor}; adjusters: ` +
  surface.adjusters.map(a => `${a.name}=${a.value}`).join(', ');
const stops = [[68,1,84],[59,82,139],[33,145,140],[94,201,98],[253,231,37]];
function color(p) {
  const x = Math.min(1, Math.max(0, p)) * (stops.length - 1), i = Math.min(stops.length - 2, Math.floor(x)), f = x - i;
  const c = stops[i].map((v, k) => Math.round(v + f * (stops[i + 1][k] - v)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}
function heatmap(title, times, grid, prob) {
  const w = 420, h = 300, div = document.createElement('div'), cv = document.createElement('canvas');
  div.className = 'panel'; div.innerHTML = `<h3>${title}</h3>`; cv.width = w; cv.height = h;
  div.appendChild(cv); document.getElementById('surfaces').appendChild(div);
  const ctx = cv.getContext('2d'), nt = times.length, np = grid.length, cw = w / nt, ch = h / np;
  for (let r = 0; r < np; r++) for (let c = 0; c < nt; c++) {
    ctx.fillStyle = color(prob[r * nt + c]);
    ctx.fillRect(c * cw, h - (r + 1) * ch, Math.ceil(cw), Math.ceil(ch));
  }
  cv.onmousemove = e => {
    const c = Math.min(nt - 1, Math.floor(e.offsetX / cw)), r = Math.min(np - 1, Math.floor((h - e.offsetY) / ch));
    document.getElementById('readout').textContent =
      `${title}: time ${times[c]}, ${surface.predictor} ${grid[r].toFixed(4)}, p = ${prob[r * nt + c]}`;
  };
}
if (surface.panels) surface.panels.forEach(p => heatmap(p.stratum, p.time_grid, surface.predictor_grid, p.prob));
else heatmap(surface.family, surface.time_grid, surface.predictor_grid, surface.prob);
function curves(title, times, values, lower, upper) {
  const w = 420, h = 260, div = document.createElement('div'), cv = document.createElement('canvas');
  div.className = 'panel'; div.innerHTML = `<h3>${title}</h3>`; cv.width = w; cv.height = h;
  div.appendChild(cv); document.getElementById('curves').appendChild(div);
  const ctx = cv.getContext('2d'), nt = times.length, tmax = times[nt - 1] || 1;
  const X = t => t / tmax * (w - 10) + 5, Y = p => h - 5 - p * (h - 10);
  quantiles.levels.forEach((lv, k) => {
    ctx.strokeStyle = color(k / (quantiles.levels.length - 1));
    if (lower && upper) {
      ctx.globalAlpha = 0.15; ctx.fillStyle = ctx.strokeStyle; ctx.beginPath();
      for (let c = 0; c < nt; c++) ctx.lineTo(X(times[c]), Y(upper[k * nt + c]));
      for (let c = nt - 1; c >= 0; c--) ctx.lineTo(X(times[c]), Y(lower[k * nt + c]));
      ctx.fill(); ctx.globalAlpha = 1;
    }
    ctx.beginPath();
    for (let c = 0; c < nt; c++) ctx.lineTo(X(times[c]), Y(values[k * nt + c]));
    ctx.stroke();
  });
  const legend = document.createElement('div');
  legend.textContent = quantiles.levels.map((lv, k) =>
    `q${lv}: ${quantiles.predictor_values[k].toFixed(3)}`).join('  ');
  div.appendChild(legend);
}
if (quantiles.panels) quantiles.panels.forEach(p => curves(p.stratum, p.time_grid, p.curves, p.lower, p.upper));
else curves(quantiles.family, quantiles.time_grid, quantiles.curves, quantiles.lower, quantiles.upper);
const rows = [['C-index', metrics.c_index], ['comparable pairs', metrics.comparable_pairs],
              ['integrated Brier score', metrics.integrated_brier], ['window tau', metrics.tau]];
document.getElementById('metrics').innerHTML = rows.map(r => `<tr><th>${r[0]}</th><td>${r[1]}</td></tr>`).join('');
</script>
</body>
</html>
)";

}  // namespace

std::string render_report(const std::string& contour_json, const std::string& quantiles_json,
                          const std::string& metrics_json, const std::string& ingest_json) {
  std::string html = kHead;
  auto data = [&](const char* id, const std::string& json) {
    html += "<script type=\"application/json\" id=\"";
    html += id;
    html += "\">";
    html += embed(json);
    html += "</script>\n";
  };
  data("contour", contour_json);
  data("quantiles", quantiles_json);
  data("metrics", metrics_json);
  data("ingest", ingest_json);
  html += kScript;
  return html;
}

}  // namespace survcontour::cli
