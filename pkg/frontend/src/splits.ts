/** Incremental split arithmetic shared by zero-shot and fine-tuned runs.
 *
 * Boundaries sit at floor(n * b) for breakpoints (0.5, 0.7, 0.9, 1.0):
 * round k trains on everything up to its boundary and is tested on the
 * following block. The fine-tuning data of a round is the block of new
 * observations it reveals, split 80/20 into train and validation, which
 * for the standard breakpoints is 40%/10% of the total in round one and
 * 16%/4% in the later rounds.
 */

import { AdapterError } from "./types.js";

export interface SplitSegment {
  fitEnd: number; // exclusive 0-based end of the training data
  testStart: number; // inclusive 0-based start of the forecast block
  testEnd: number; // exclusive
}

export interface SplitPlan {
  n: number;
  segments: SplitSegment[];
}

export const DEFAULT_BREAKPOINTS = [0.5, 0.7, 0.9, 1.0];

export function makeSplitPlan(
  n: number,
  breakpoints: number[] = DEFAULT_BREAKPOINTS,
): SplitPlan {
  if (n < 100) {
    throw new AdapterError(`need at least 100 observations, have ${n}`);
  }
  for (let i = 1; i < breakpoints.length; i++) {
    if (breakpoints[i] <= breakpoints[i - 1]) {
      throw new AdapterError(`breakpoints must increase: ${breakpoints}`);
    }
  }
  if (breakpoints[breakpoints.length - 1] !== 1.0) {
    throw new AdapterError("breakpoints must end at 1.0");
  }
  const bounds = breakpoints.map((b) => Math.floor(n * b));
  const segments: SplitSegment[] = [];
  for (let i = 0; i + 1 < bounds.length; i++) {
    if (bounds[i + 1] <= bounds[i]) {
      throw new AdapterError(`empty test block between ${bounds[i]} and ${bounds[i + 1]}`);
    }
    segments.push({ fitEnd: bounds[i], testStart: bounds[i], testEnd: bounds[i + 1] });
  }
  return { n, segments };
}

/** New observations fine-tuned on in round k (0-based): [lo, hi). */
export function roundBlock(plan: SplitPlan, k: number): [number, number] {
  const lo = k === 0 ? 0 : plan.segments[k - 1].fitEnd;
  return [lo, plan.segments[k].fitEnd];
}

/** Train/validation sizes over round k's new data (80/20 chronological). */
export function roundTrainVal(plan: SplitPlan, k: number): [number, number] {
  const [lo, hi] = roundBlock(plan, k);
  const block = hi - lo;
  const train = Math.floor(0.8 * block);
  return [train, block - train];
}
