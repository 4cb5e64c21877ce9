import init, { score_metrics, leaderboard, split_preview } from "./pkg/crisis_mt_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function show(out, fn) {
  try {
    out.className = "";
    out.textContent = fn();
  } catch (err) {
    out.className = "error";
    out.textContent = String(err.message ?? err);
  }
}

function sampleCorpus() {
  const en = ["stay at home", "wash your hands", "keep your distance", "boil the water", "the clinic is open"];
  const ga = ["fan sa bhaile", "nigh do lámha", "coinnigh d'achar", "fiuch an t-uisce", "tá an clinic oscailte"];
  const src = [], tgt = [];
  for (let i = 0; i < 40; i++) {
    src.push(`${en[i % en.length]} ${i}`);
    tgt.push(`${ga[i % ga.length]} ${i}`);
  }
  src.push(src[3].toUpperCase());
  tgt.push(tgt[3]);
  $("src").value = src.join("\n");
  $("tgt").value = tgt.join("\n");
}

await init();
sampleCorpus();

$("score").onclick = () =>
  show($("score-out"), () => {
    const report = JSON.parse(score_metrics($("hyp").value, $("ref").value));
    return `BLEU ${report.bleu.toFixed(2)}   TER ${report.ter.toFixed(4)}   ChrF3 ${report.chrf3.toFixed(4)}\n\n` +
      JSON.stringify(report.components, null, 2);
  });

$("rank").onclick = () =>
  show($("rank-out"), () =>
    leaderboard($("direction").value, $("reference").value, $("records").value, $("format").value));

$("preview").onclick = () =>
  show($("split-out"), () =>
    split_preview($("src").value, $("tgt").value, $("pair").value, $("ratios").value,
      BigInt($("seed").value || 0), $("dedup").checked, 3));
