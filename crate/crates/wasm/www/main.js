import init, { spacetime_raster, PlanarChain } from "./pkg/vorproc_wasm.js";

const $ = (id) => document.getElementById(id);

function renderSpacetime() {
  const alpha = Number($("st-alpha").value);
  const n = Number($("st-n").value);
  const steps = Number($("st-steps").value);
  const seed = Number($("st-seed").value);
  const bins = 256;
  let rgba;
  try {
    rgba = spacetime_raster(alpha, n, steps, bins, seed);
  } catch (e) {
    alert(e);
    return;
  }
  const canvas = $("st-canvas");
  canvas.width = bins;
  canvas.height = steps;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), bins, steps), 0, 0);
}

let chain = null;
let playing = false;

function resetChain() {
  const selection = document.querySelector("input[name=sel]:checked").value;
  try {
    chain?.free();
    chain = new PlanarChain($("pc-torus").checked, Number($("pc-n").value), selection, Number($("pc-param").value), 0);
  } catch (e) {
    chain = null;
    alert(e);
  }
  drawChain();
}

function drawChain() {
  const canvas = $("pc-canvas");
  const ctx = canvas.getContext("2d");
  const s = canvas.width;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, s, s);
  if (!chain) return;
  // Flip y so the unit square has its origin at the bottom left.
  const tx = (x) => x * s;
  const ty = (y) => (1 - y) * s;
  const shifts = chain.is_torus() ? [-1, 0, 1] : [0];
  const probs = chain.probabilities();
  const pmax = Math.max(...probs);
  ctx.strokeStyle = "#666";
  ctx.lineWidth = 0.5;
  for (let i = 0; i < chain.len(); i++) {
    const ring = chain.cell_polygon(i);
    const shade = Math.round(255 - 160 * (probs[i] / pmax));
    ctx.fillStyle = `rgb(${shade},${shade},255)`;
    for (const dx of shifts) {
      for (const dy of shifts) {
        ctx.beginPath();
        for (let k = 0; k < ring.length; k += 2) {
          const x = tx(ring[k] + dx);
          const y = ty(ring[k + 1] + dy);
          k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
        }
        ctx.closePath();
        ctx.fill();
        ctx.stroke();
      }
    }
  }
  const pts = chain.points();
  ctx.fillStyle = "#000";
  for (let k = 0; k < pts.length; k += 2) {
    ctx.fillRect(tx(pts[k]) - 1.5, ty(pts[k + 1]) - 1.5, 3, 3);
  }
  $("pc-step").value = chain.steps();
  $("pc-index").value = chain.clustering_index().toFixed(3);
  $("pc-thiel").value = chain.thiel_redundancy().toFixed(3);
}

function frame() {
  if (!playing || !chain) return;
  try {
    chain.advance(10);
  } catch (e) {
    playing = false;
    $("pc-play").textContent = "Run";
    alert(e);
  }
  drawChain();
  requestAnimationFrame(frame);
}

await init();
$("st-alpha").addEventListener("input", () => ($("st-alpha-out").value = $("st-alpha").value));
$("st-run").addEventListener("click", renderSpacetime);
$("pc-reset").addEventListener("click", resetChain);
$("pc-play").addEventListener("click", () => {
  playing = !playing;
  $("pc-play").textContent = playing ? "Pause" : "Run";
  requestAnimationFrame(frame);
});
renderSpacetime();
resetChain();
