export { readRvCsv, readForecasts, writeForecasts } from "./csv.js";
export {
  CHECKPOINT_FORMAT,
  Checkpoint,
  features,
  finetune,
  FinetuneReport,
  N_FEATURES,
  predictOne,
  pretrainedCheckpoint,
  validateCheckpoint,
} from "./model.js";
export {
  AdapterRun,
  auditNoLeakage,
  incrementalFinetune,
  loadCheckpoint,
  RoundMeta,
  saveCheckpoint,
  zeroShotForecast,
} from "./runner.js";
export {
  DEFAULT_BREAKPOINTS,
  makeSplitPlan,
  roundBlock,
  roundTrainVal,
  SplitPlan,
  SplitSegment,
} from "./splits.js";
export {
  AdapterError,
  CONTEXT_LENGTHS,
  ContextLength,
  defaultConfig,
  FinetuneConfig,
  ForecastRow,
  modelId,
  RvRow,
} from "./types.js";
