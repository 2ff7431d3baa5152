import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";
import { main } from "../src/cli.js";
import { readForecasts } from "../src/csv.js";

let dir: string;
beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "tfm-int-"));
});
afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function havePython(): boolean {
  const probe = spawnSync("python3", ["-c", "import rvbench"], {
    encoding: "utf8",
  });
  return probe.status === 0;
}

function makeDataCsv(file: string, n = 400): void {
  if (havePython()) {
    const r = spawnSync(
      "python3",
      ["-m", "rvbench.cli", "fixture", "--out", file, "--n", String(n),
       "--symbols", "SYN", "--seed", "13"],
      { encoding: "utf8" },
    );
    if (r.status === 0) return;
  }
  // stand-alone fallback: write an equivalent synthetic file locally
  const lines = ["symbol,date,close,rv,bpv"];
  let state = 13 >>> 0;
  const rand = () => {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 4294967296;
  };
  let logRv = -9.4;
  let close = 100;
  for (let i = 0; i < n; i++) {
    logRv = -9.4 * 0.03 + 0.97 * logRv + 0.5 * (rand() - 0.5);
    const rv = Math.exp(logRv);
    close *= Math.exp(Math.sqrt(rv) * (rand() - 0.5));
    const d = new Date(Date.UTC(2005, 0, 3) + i * 86_400_000)
      .toISOString()
      .slice(0, 10);
    lines.push(`SYN,${d},${close},${rv},${rv * 0.9}`);
  }
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

describe("cli", () => {
  it("init-checkpoint then zero-shot and finetune emit valid files", () => {
    const data = path.join(dir, "data.csv");
    makeDataCsv(data);
    const ckpt = path.join(dir, "ckpt.json");
    expect(main(["init-checkpoint", "--context", "64", "--out", ckpt])).toBe(0);

    const zs = path.join(dir, "zs.csv");
    expect(
      main(["zero-shot", "--data", data, "--symbol", "SYN", "--context", "64",
            "--checkpoint", ckpt, "--out", zs]),
    ).toBe(0);
    const zsRows = readForecasts(zs);
    expect(zsRows.length).toBe(200);
    expect(zsRows[0].model).toBe("TFM64_PT");

    const ft = path.join(dir, "ft.csv");
    expect(
      main(["finetune", "--data", data, "--symbol", "SYN", "--context", "64",
            "--checkpoint", ckpt, "--out", ft]),
    ).toBe(0);
    const ftRows = readForecasts(ft);
    expect(ftRows.length).toBe(200);
    expect(ftRows[0].model).toBe("TFM64_IL");
  });

  it("emits schema-valid files for every context length", () => {
    // the 512-point context needs the round-one training block (40% of the
    // sample) to exceed it, as it does on the real two-decade series
    const data = path.join(dir, "data.csv");
    makeDataCsv(data, 1500);
    for (const ctx of ["64", "128", "512"]) {
      const ckpt = path.join(dir, `ckpt${ctx}.json`);
      expect(main(["init-checkpoint", "--context", ctx, "--out", ckpt])).toBe(0);
      const out = path.join(dir, `tfm${ctx}.csv`);
      expect(
        main(["finetune", "--data", data, "--symbol", "SYN", "--context", ctx,
              "--checkpoint", ckpt, "--out", out]),
      ).toBe(0);
      const rows = readForecasts(out);
      expect(rows.length).toBe(750);
      expect(rows[0].model).toBe(`TFM${ctx}_IL`);
    }
  });

  it("missing checkpoint is an explicit error", () => {
    const data = path.join(dir, "data.csv");
    makeDataCsv(data);
    expect(
      main(["zero-shot", "--data", data, "--symbol", "SYN", "--context", "64",
            "--checkpoint", path.join(dir, "nope.json"),
            "--out", path.join(dir, "x.csv")]),
    ).toBe(2);
  });

  it("emitted forecasts evaluate cleanly in the primary pipeline", () => {
    if (!havePython()) {
      console.warn("python3/rvbench unavailable; skipping cross-pipeline check");
      return;
    }
    const data = path.join(dir, "data.csv");
    makeDataCsv(data);
    const ckpt = path.join(dir, "ckpt.json");
    main(["init-checkpoint", "--context", "64", "--log", "--out", ckpt]);
    const out = path.join(dir, "tfm.csv");
    expect(
      main(["finetune", "--data", data, "--symbol", "SYN", "--context", "64",
            "--log", "--checkpoint", ckpt, "--out", out]),
    ).toBe(0);
    const evalOut = path.join(dir, "eval.csv");
    const r = spawnSync(
      "python3",
      ["-m", "rvbench.cli", "evaluate", "--data", data, "--forecasts", out,
       "--out", evalOut],
      { encoding: "utf8" },
    );
    expect(r.status).toBe(0);
    const table = fs.readFileSync(evalOut, "utf8").trim().split("\n");
    expect(table[0]).toBe("symbol,model,mse,mae,mape,mda,qlike,smape");
    expect(table.length).toBe(2);
    expect(table[1]).toContain("TFM64_IL_log");
  });
});
