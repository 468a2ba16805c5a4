import init, { density, find, verify } from "./pkg/sqtwist_wasm.js";

const $ = (id) => document.getElementById(id);

function show(id, f) {
  const out = $(id);
  out.classList.remove("error");
  try {
    out.textContent = f();
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e);
  }
}

function densityText() {
  const d = JSON.parse(density($("set").value, Number($("t").value), Number($("big-t").value)));
  return [
    `|S| = ${d.size}, N = ${d.universe}`,
    `f_S(t) = ${d.f.toFixed(7)}`,
    `smoothed density = ${d.smoothed.toFixed(7)} (tail beyond N <= ${d.truncation_error_bound.toExponential(2)})`,
  ].join("\n");
}

function findText() {
  const r = JSON.parse(find($("set").value, Number($("n").value)));
  const lines = [
    `guided: ${r.guided ?? `exhausted at ${r.guided_exhausted}`}`,
    `brute force: ${r.brute_total}${r.brute_truncated ? "+ (truncated)" : ""} strict ${r.n}-parallelepipeds`,
    ...r.brute,
  ];
  if (r.brute_total > r.brute.length) lines.push(`... ${r.brute_total - r.brute.length} more`);
  return lines.join("\n");
}

function verifyText() {
  const v = JSON.parse(verify($("certificate").value));
  return v.valid ? "Valid" : ["Invalid", ...v.violations.map((x) => `  ${x}`)].join("\n");
}

await init();
$("run-density").onclick = () => show("density-out", densityText);
$("run-find").onclick = () => show("find-out", findText);
$("run-verify").onclick = () => show("verify-out", verifyText);
$("load-sample").onclick = async () => {
  $("certificate").value = await (await fetch("sample-certificate.json")).text();
};
