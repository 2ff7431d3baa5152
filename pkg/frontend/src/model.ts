/** Forecasting backend with a frozen featurizer and a trainable core layer.
 *
 * The production TimesFM checkpoint is a decoder-only transformer; in this
 * adapter the heavy layers are replaced by a deterministic patch featurizer
 * (multi-horizon means, last level, recent drift and dispersion over the
 * context window) that stays frozen, and fine-tuning touches only the
 * linear core layer on top - the same linear-probing regime the full model
 * is trained under. The optimizer is Adam with a cosine learning-rate
 * schedule, global-norm gradient clipping, a weight EMA, and early
 * stopping with best-checkpoint restore.
 */

import { AdapterError, FinetuneConfig } from "./types.js";

export const CHECKPOINT_FORMAT = "tfm-surrogate-v1";

export interface Checkpoint {
  format: string;
  contextLength: number;
  logSpace: boolean;
  weights: number[];
  bias: number;
  norm: { mean: number; sd: number };
  trainedSteps: number;
}

/** Frozen patch features over one context window. */
export function features(context: Float64Array): number[] {
  const L = context.length;
  const last = context[L - 1];
  const meanOver = (span: number): number => {
    const k = Math.min(span, L);
    let s = 0;
    for (let i = L - k; i < L; i++) s += context[i];
    return s / k;
  };
  const m5 = meanOver(5);
  const m22 = meanOver(22);
  const mAll = meanOver(L);
  const drift = L >= 2 ? last - context[L - 2] : 0;
  const k = Math.min(22, L);
  let varAcc = 0;
  for (let i = L - k; i < L; i++) {
    const d = context[i] - m22;
    varAcc += d * d;
  }
  const disp = Math.sqrt(varAcc / k);
  return [last, m5, m22, mAll, drift, disp];
}

export const N_FEATURES = 6;

/** Deterministic pretrained weights: a persistence prior on the last level. */
export function pretrainedCheckpoint(config: FinetuneConfig): Checkpoint {
  const weights = new Array(N_FEATURES).fill(0);
  weights[0] = 1.0;
  return {
    format: CHECKPOINT_FORMAT,
    contextLength: config.contextLength,
    logSpace: config.logSpace,
    weights,
    bias: 0,
    norm: { mean: 0, sd: 1 },
    trainedSteps: 0,
  };
}

export function validateCheckpoint(raw: unknown, config: FinetuneConfig): Checkpoint {
  const ckpt = raw as Checkpoint;
  if (
    !ckpt ||
    ckpt.format !== CHECKPOINT_FORMAT ||
    !Array.isArray(ckpt.weights) ||
    ckpt.weights.length !== N_FEATURES ||
    typeof ckpt.bias !== "number" ||
    !ckpt.norm ||
    !Number.isFinite(ckpt.norm.mean) ||
    !(ckpt.norm.sd > 0)
  ) {
    throw new AdapterError("checkpoint load failure: unrecognized or corrupt contents");
  }
  if (ckpt.contextLength !== config.contextLength || ckpt.logSpace !== config.logSpace) {
    throw new AdapterError(
      `checkpoint load failure: trained for context ${ckpt.contextLength}` +
        `${ckpt.logSpace ? " (log)" : ""}, requested ${config.contextLength}` +
        `${config.logSpace ? " (log)" : ""}`,
    );
  }
  return ckpt;
}

export function predictOne(ckpt: Checkpoint, context: Float64Array): number {
  const f = features(context);
  let z = ckpt.bias;
  for (let j = 0; j < N_FEATURES; j++) {
    z += ckpt.weights[j] * ((f[j] - ckpt.norm.mean) / ckpt.norm.sd);
  }
  return z * ckpt.norm.sd + ckpt.norm.mean;
}

/** Deterministic 32-bit PRNG for batch shuffling. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function cosineLr(config: FinetuneConfig, step: number): number {
  const total = config.lrScheduleSteps;
  const t = Math.min(step, total) / total;
  return config.lrEnd + 0.5 * (config.lrStart - config.lrEnd) * (1 + Math.cos(Math.PI * t));
}

interface Example {
  f: number[];
  y: number;
}

function buildExamples(values: Float64Array, L: number, lo: number, hi: number,
                       norm: { mean: number; sd: number }): Example[] {
  const out: Example[] = [];
  for (let t = Math.max(lo, L); t < hi; t++) {
    const raw = features(values.subarray(t - L, t));
    out.push({
      f: raw.map((v) => (v - norm.mean) / norm.sd),
      y: (values[t] - norm.mean) / norm.sd,
    });
  }
  return out;
}

function mseLoss(w: number[], b: number, examples: Example[]): number {
  let acc = 0;
  for (const ex of examples) {
    let z = b;
    for (let j = 0; j < N_FEATURES; j++) z += w[j] * ex.f[j];
    const e = z - ex.y;
    acc += e * e;
  }
  return acc / examples.length;
}

export interface FinetuneReport {
  checkpoint: Checkpoint;
  epochs: number;
  steps: number;
  bestValLoss: number;
  valLossHistory: number[];
}

/**
 * Fine-tune the core layer on values[trainLo, trainHi) with validation on
 * values[valLo, valHi). Contexts may reach back before trainLo; targets
 * never do. Returns the best-validation checkpoint (EMA weights).
 */
export function finetune(
  start: Checkpoint,
  values: Float64Array,
  trainLo: number,
  trainHi: number,
  valLo: number,
  valHi: number,
  config: FinetuneConfig,
): FinetuneReport {
  const L = config.contextLength;
  // normalization is estimated on the training slice only
  let mean = 0;
  for (let t = trainLo; t < trainHi; t++) mean += values[t];
  mean /= trainHi - trainLo;
  let varAcc = 0;
  for (let t = trainLo; t < trainHi; t++) {
    const d = values[t] - mean;
    varAcc += d * d;
  }
  const sd = Math.sqrt(varAcc / Math.max(1, trainHi - trainLo - 1)) || 1;
  const norm = { mean, sd };

  const train = buildExamples(values, L, trainLo, trainHi, norm);
  const val = buildExamples(values, L, valLo, valHi, norm);
  if (train.length === 0 || val.length === 0) {
    throw new AdapterError(
      `fine-tuning needs non-empty train/validation windows after the ` +
        `${L}-point context warm-up (train ${train.length}, val ${val.length})`,
    );
  }

  // Start from the incoming core layer, re-expressed under the new scale.
  // Features and targets share one normalization, so the raw-space slope is
  // the weight vector itself and only the bias needs an exact remap:
  // b_new = (sd_old * b_old + (mean_old - mean_new) * (1 - sum w)) / sd_new,
  // which keeps the transferred model's predictions identical.
  const w = start.weights.slice();
  const wsum = w.reduce((acc, v) => acc + v, 0);
  let b =
    (start.norm.sd * start.bias + (start.norm.mean - mean) * (1 - wsum)) / sd;
  const mAdam = new Array(N_FEATURES + 1).fill(0);
  const vAdam = new Array(N_FEATURES + 1).fill(0);
  const ema = [...w, b];
  const beta1 = 0.9;
  const beta2 = 0.999;
  const epsAdam = 1e-8;

  const rng = mulberry32(config.seed + 0x9e37);
  let step = 0;
  let bestVal = Infinity;
  let bestWeights = [...w, b];
  let sinceBest = 0;
  let epoch = 0;
  const history: number[] = [];

  const order = train.map((_, i) => i);
  for (epoch = 0; epoch < config.maxEpochs; epoch++) {
    // Fisher-Yates shuffle, deterministic under the run seed
    for (let i = order.length - 1; i > 0; i--) {
      const j = Math.floor(rng() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    for (let lo = 0; lo < order.length; lo += config.batchSize) {
      if (step >= config.lrScheduleSteps) break;
      const batch = order.slice(lo, lo + config.batchSize);
      const grad = new Array(N_FEATURES + 1).fill(0);
      for (const i of batch) {
        const ex = train[i];
        let z = b;
        for (let j = 0; j < N_FEATURES; j++) z += w[j] * ex.f[j];
        const e = (2 * (z - ex.y)) / batch.length;
        for (let j = 0; j < N_FEATURES; j++) grad[j] += e * ex.f[j];
        grad[N_FEATURES] += e;
      }
      let norm2 = 0;
      for (const g of grad) norm2 += g * g;
      const gnorm = Math.sqrt(norm2);
      if (gnorm > config.gradClip) {
        const scale = config.gradClip / gnorm;
        for (let j = 0; j <= N_FEATURES; j++) grad[j] *= scale;
      }
      step++;
      const lr = cosineLr(config, step);
      for (let j = 0; j <= N_FEATURES; j++) {
        mAdam[j] = beta1 * mAdam[j] + (1 - beta1) * grad[j];
        vAdam[j] = beta2 * vAdam[j] + (1 - beta2) * grad[j] * grad[j];
        const mHat = mAdam[j] / (1 - Math.pow(beta1, step));
        const vHat = vAdam[j] / (1 - Math.pow(beta2, step));
        const delta = (lr * mHat) / (Math.sqrt(vHat) + epsAdam);
        if (j < N_FEATURES) w[j] -= delta;
        else b -= delta;
        const cur = j < N_FEATURES ? w[j] : b;
        ema[j] = config.emaDecay * ema[j] + (1 - config.emaDecay) * cur;
      }
    }
    const valLoss = mseLoss(
      ema.slice(0, N_FEATURES),
      ema[N_FEATURES],
      val,
    );
    history.push(valLoss);
    if (!Number.isFinite(valLoss)) {
      throw new AdapterError(
        `fine-tuning diverged: validation loss ${valLoss} at epoch ${epoch + 1}`,
      );
    }
    if (valLoss < bestVal - 1e-12) {
      bestVal = valLoss;
      bestWeights = ema.slice();
      sinceBest = 0;
    } else {
      sinceBest++;
      if (sinceBest >= config.patience) {
        epoch++;
        break;
      }
    }
    if (step >= config.lrScheduleSteps) {
      epoch++;
      break;
    }
  }

  return {
    checkpoint: {
      format: CHECKPOINT_FORMAT,
      contextLength: config.contextLength,
      logSpace: config.logSpace,
      weights: bestWeights.slice(0, N_FEATURES),
      bias: bestWeights[N_FEATURES],
      norm,
      trainedSteps: start.trainedSteps + step,
    },
    epochs: epoch,
    steps: step,
    bestValLoss: bestVal,
    valLossHistory: history,
  };
}
