import init, { Demo } from "./pkg/curatr_web_demo.js";

const $ = (id) => document.getElementById(id);

function cell(text, cls) {
  const td = document.createElement("td");
  td.textContent = text;
  if (cls) td.className = cls;
  return td;
}

function table(headers, rows) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const row of rows) {
    const tr = t.insertRow();
    for (const [text, cls] of row) tr.appendChild(cell(text, cls));
  }
  return t;
}

function showError(target, err) {
  target.replaceChildren();
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err.message ?? err);
  target.appendChild(p);
}

function drawSeries(canvas, points, label) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = { left: 70, right: 20, top: 20, bottom: 40 };
  ctx.clearRect(0, 0, width, height);
  if (points.length === 0) return;

  const years = points.map((p) => p.year);
  const values = points.map((p) => p.relative_frequency);
  const x0 = Math.min(...years), x1 = Math.max(...years);
  const yMax = Math.max(...values) || 1;
  const x = (year) => pad.left + (x1 === x0 ? 0.5 : (year - x0) / (x1 - x0)) * (width - pad.left - pad.right);
  const y = (v) => height - pad.bottom - (v / yMax) * (height - pad.top - pad.bottom);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad.left, pad.top);
  ctx.lineTo(pad.left, height - pad.bottom);
  ctx.lineTo(width - pad.right, height - pad.bottom);
  ctx.stroke();

  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  for (const p of points) ctx.fillText(String(p.year), x(p.year), height - pad.bottom + 16);
  ctx.textAlign = "right";
  ctx.fillText(yMax.toExponential(2), pad.left - 6, pad.top + 4);
  ctx.fillText("0", pad.left - 6, height - pad.bottom + 4);
  ctx.textAlign = "left";
  ctx.fillText(`"${label}" per token`, pad.left + 6, pad.top);

  ctx.strokeStyle = "#8b1e3f";
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach((p, i) => {
    const px = x(p.year), py = y(p.relative_frequency);
    if (i === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.fillStyle = "#8b1e3f";
  for (const p of points) {
    ctx.beginPath();
    ctx.arc(x(p.year), y(p.relative_frequency), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

async function main() {
  await init();
  const demo = new Demo();
  $("status").textContent =
    `${demo.documents()} documents, ${demo.vocabulary_size()} terms in the embedding vocabulary.`;

  const plot = () => {
    const term = $("ngram-term").value;
    try {
      drawSeries($("ngram-chart"), JSON.parse(demo.ngram_series(term)), term.trim().toLowerCase());
      $("ngram-error").textContent = "";
    } catch (err) {
      $("ngram-error").textContent = String(err.message ?? err);
    }
  };

  const recommend = () => {
    const out = $("similar-out");
    try {
      const hits = JSON.parse(demo.similar($("similar-terms").value, Number($("similar-k").value)));
      out.replaceChildren(table(["term", "cosine"], hits.map((h) => [[h.term], [h.score.toFixed(4), "num"]])));
    } catch (err) {
      showError(out, err);
    }
  };

  const rank = () => {
    const out = $("rank-out");
    try {
      const rows = JSON.parse(demo.rank($("rank-terms").value, 10));
      out.replaceChildren(table(
        ["#", "title", "author", "year", "score", "matched"],
        rows.map((r) => [
          [String(r.rank), "num"], [r.title], [r.author], [r.year ?? ""],
          [r.score.toFixed(5), "num"],
          [Object.entries(r.matched_terms).map(([t, n]) => `${t}×${n}`).join(", ")],
        ]),
      ));
    } catch (err) {
      showError(out, err);
    }
  };

  for (const [form, action] of [["ngram-form", plot], ["similar-form", recommend], ["rank-form", rank]]) {
    $(form).addEventListener("submit", (e) => { e.preventDefault(); action(); });
  }
  plot();
  recommend();
  rank();
}

main().catch((err) => {
  $("status").textContent = `Failed to start: ${err.message ?? err}`;
  $("status").className = "error";
});
