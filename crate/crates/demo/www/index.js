// SPDX-License-Identifier: MIT OR Apache-2.0
import init, { truthTable, varianceCurves, readoutScatter } from "./pkg/uand_demo.js";

const num = (id) => Number(document.getElementById(id).value);
const show = (id, render) => {
  const el = document.getElementById(id);
  try {
    el.innerHTML = render();
  } catch (e) {
    el.innerHTML = `<p class="error">${e.message ?? e}</p>`;
  }
};
const fmt = (x) => (Math.abs(x) < 5e-13 ? 0 : x).toFixed(4);

function tableHtml(out) {
  let rows = `<tr><th>v_i v_j</th>${out.classes.map((c) => `<th>${c}</th>`).join("")}<th>target</th><th>combined</th></tr>`;
  out.cases.forEach((c, k) => {
    rows += `<tr><td>${c}</td>${out.table[k].map((x) => `<td>${fmt(x)}</td>`).join("")}`;
    rows += `<td>${fmt(out.target[k])}</td><td>${fmt(out.reconstruction[k])}</td></tr>`;
  });
  rows += `<tr><th>coef</th>${out.coefficients.map((x) => `<td>${fmt(x)}</td>`).join("")}<td></td><td></td></tr>`;
  return `<table>${rows}</table>`;
}

function update() {
  const [u, l, p, b, s] = ["upper", "lower", "p", "bias", "s"].map(num);
  const target = document.getElementById("target").value;
  show("table", () => tableHtml(JSON.parse(truthTable(u, l, p, b, s, target))));
  show("curves", () => varianceCurves(Math.max(s, 1), num("m"), u, l, p, num("dmin"), num("dmax")));
  show("scatter", () =>
    readoutScatter(num("m"), num("d"), Math.max(s, 2), BigInt(num("seed")), u, l, p, b, num("pi"), num("pj")),
  );
}

await init();
document.querySelectorAll("input, select").forEach((el) => el.addEventListener("change", update));
update();
