/** Shared types for the fine-tuning adapter. */

export interface RvRow {
  symbol: string;
  date: string; // ISO day
  close: number;
  rv: number;
  bpv: number | null;
}

export interface ForecastRow {
  model: string;
  symbol: string;
  date: string;
  forecast: number;
}

export const CONTEXT_LENGTHS = [64, 128, 512] as const;
export type ContextLength = (typeof CONTEXT_LENGTHS)[number];

export interface FinetuneConfig {
  contextLength: ContextLength;
  horizon: 1;
  lrStart: number;
  lrEnd: number;
  lrScheduleSteps: number;
  gradClip: number;
  emaDecay: number;
  maxEpochs: number;
  patience: number;
  batchSize: number;
  logSpace: boolean;
  seed: number;
}

export function defaultConfig(
  contextLength: ContextLength,
  logSpace = false,
  seed = 0,
): FinetuneConfig {
  return {
    contextLength,
    horizon: 1,
    lrStart: 1e-3,
    lrEnd: 1e-4,
    lrScheduleSteps: 40_000,
    gradClip: 100,
    emaDecay: 0.9999,
    maxEpochs: 100,
    patience: 5,
    batchSize: 32,
    logSpace,
    seed,
  };
}

export function modelId(config: FinetuneConfig, finetuned: boolean): string {
  const stem = `TFM${config.contextLength}_${finetuned ? "IL" : "PT"}`;
  return config.logSpace ? `${stem}_log` : stem;
}

export class AdapterError extends Error {}
