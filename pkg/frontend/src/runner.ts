/** Zero-shot and incrementally fine-tuned forecast production.
 *
 * Both paths forecast one day ahead over the final half of the sample,
 * shifting the input window daily. The incremental path fine-tunes three
 * times: on the first half (80/20 train/validation), then on each newly
 * revealed 20% block (again 80/20, i.e. 16%/4% of the total), always
 * starting from the previous round's best checkpoint.
 */

import * as fs from "node:fs";
import {
  Checkpoint,
  finetune,
  predictOne,
  validateCheckpoint,
} from "./model.js";
import { makeSplitPlan, roundBlock, roundTrainVal, SplitPlan } from "./splits.js";
import { AdapterError, FinetuneConfig, ForecastRow, modelId, RvRow } from "./types.js";

const FORECAST_FLOOR = 1e-10;

export interface RoundMeta {
  round: number;
  trainCutoffDate: string; // last date visible to this round's training
  forecastDates: string[];
  epochs: number;
  steps: number;
  bestValLoss: number;
}

export interface AdapterRun {
  modelId: string;
  symbol: string;
  rows: ForecastRow[];
  rounds: RoundMeta[];
}

export function loadCheckpoint(file: string, config: FinetuneConfig): Checkpoint {
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(file, "utf8"));
  } catch (err) {
    throw new AdapterError(`checkpoint load failure: ${(err as Error).message}`);
  }
  return validateCheckpoint(raw, config);
}

export function saveCheckpoint(ckpt: Checkpoint, file: string): void {
  fs.writeFileSync(file, JSON.stringify(ckpt, null, 2) + "\n");
}

function workingValues(series: RvRow[], config: FinetuneConfig): Float64Array {
  const out = new Float64Array(series.length);
  for (let i = 0; i < series.length; i++) {
    const rv = series[i].rv;
    if (config.logSpace) {
      if (!(rv > 0)) {
        throw new AdapterError(
          `cannot log-transform rv <= 0 on ${series[i].date}; ` +
            "drop or floor zero rows at ingestion",
        );
      }
      out[i] = Math.log(rv);
    } else {
      out[i] = rv;
    }
  }
  return out;
}

function forecastBlock(
  ckpt: Checkpoint,
  values: Float64Array,
  series: RvRow[],
  config: FinetuneConfig,
  id: string,
  start: number,
  end: number,
): ForecastRow[] {
  const L = config.contextLength;
  const rows: ForecastRow[] = [];
  for (let t = start; t < end; t++) {
    if (t < L) {
      throw new AdapterError(
        `forecast at position ${t} needs a full ${L}-point context`,
      );
    }
    let f = predictOne(ckpt, values.subarray(t - L, t));
    if (config.logSpace) f = Math.exp(f);
    if (!(f > 0)) f = FORECAST_FLOOR;
    if (!Number.isFinite(f)) {
      throw new AdapterError(`non-finite forecast at ${series[t].date}`);
    }
    rows.push({ model: id, symbol: series[t].symbol, date: series[t].date, forecast: f });
  }
  return rows;
}

export function zeroShotForecast(
  series: RvRow[],
  config: FinetuneConfig,
  checkpoint: Checkpoint,
  plan?: SplitPlan,
): AdapterRun {
  if (series.length <= config.contextLength) {
    throw new AdapterError(
      `series length ${series.length} must exceed the context length ` +
        `${config.contextLength}`,
    );
  }
  plan = plan ?? makeSplitPlan(series.length);
  const values = workingValues(series, config);
  const id = modelId(config, false);
  const rows: ForecastRow[] = [];
  const rounds: RoundMeta[] = [];
  for (const [k, seg] of plan.segments.entries()) {
    const block = forecastBlock(checkpoint, values, series, config, id,
                                seg.testStart, seg.testEnd);
    rows.push(...block);
    rounds.push({
      round: k + 1,
      trainCutoffDate: "", // pretrained: no task-specific training data
      forecastDates: block.map((r) => r.date),
      epochs: 0,
      steps: 0,
      bestValLoss: NaN,
    });
  }
  return { modelId: id, symbol: series[0].symbol, rows, rounds };
}

export function incrementalFinetune(
  series: RvRow[],
  config: FinetuneConfig,
  pretrained: Checkpoint,
  plan?: SplitPlan,
  checkpointDir?: string,
): AdapterRun {
  if (series.length <= config.contextLength) {
    throw new AdapterError(
      `series length ${series.length} must exceed the context length ` +
        `${config.contextLength}`,
    );
  }
  plan = plan ?? makeSplitPlan(series.length);
  const values = workingValues(series, config);
  const id = modelId(config, true);
  const rows: ForecastRow[] = [];
  const rounds: RoundMeta[] = [];
  let current = pretrained;
  for (const [k, seg] of plan.segments.entries()) {
    const [lo, hi] = roundBlock(plan, k);
    const [trainSize] = roundTrainVal(plan, k);
    const report = finetune(current, values, lo, lo + trainSize, lo + trainSize,
                            hi, config);
    current = report.checkpoint;
    if (checkpointDir) {
      saveCheckpoint(current, `${checkpointDir}/${id}_round${k + 1}.json`);
    }
    const block = forecastBlock(current, values, series, config, id,
                                seg.testStart, seg.testEnd);
    rows.push(...block);
    rounds.push({
      round: k + 1,
      trainCutoffDate: series[hi - 1].date,
      forecastDates: block.map((r) => r.date),
      epochs: report.epochs,
      steps: report.steps,
      bestValLoss: report.bestValLoss,
    });
  }
  return { modelId: id, symbol: series[0].symbol, rows, rounds };
}

/** Every forecast must postdate the training cutoff of its round. */
export function auditNoLeakage(run: AdapterRun): void {
  for (const meta of run.rounds) {
    for (const date of meta.forecastDates) {
      if (meta.trainCutoffDate && date <= meta.trainCutoffDate) {
        throw new AdapterError(
          `leakage: round ${meta.round} forecast ${date} does not postdate ` +
            `its training cutoff ${meta.trainCutoffDate}`,
        );
      }
    }
  }
}
