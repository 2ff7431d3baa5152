#!/usr/bin/env node
/** Command-line surface: init-checkpoint, zero-shot, finetune. */

import * as fs from "node:fs";
import { writeForecasts, readRvCsv } from "./csv.js";
import { pretrainedCheckpoint } from "./model.js";
import {
  auditNoLeakage,
  incrementalFinetune,
  loadCheckpoint,
  saveCheckpoint,
  zeroShotForecast,
} from "./runner.js";
import {
  AdapterError,
  CONTEXT_LENGTHS,
  ContextLength,
  defaultConfig,
} from "./types.js";

function usage(): string {
  return [
    "usage:",
    "  tfm-adapter init-checkpoint --context {64|128|512} [--log] --out ckpt.json",
    "  tfm-adapter zero-shot --data data.csv --symbol S --context {64|128|512}",
    "      [--log] --checkpoint ckpt.json --out forecasts.csv",
    "  tfm-adapter finetune  --data data.csv --symbol S --context {64|128|512}",
    "      [--log] --checkpoint ckpt.json --out forecasts.csv [--seed N]",
    "      [--checkpoint-dir DIR]",
  ].join("\n");
}

function parseArgs(argv: string[]): Map<string, string | boolean> {
  const out = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (!a.startsWith("--")) throw new AdapterError(`unexpected argument ${a}`);
    const key = a.slice(2);
    if (key === "log") {
      out.set(key, true);
    } else {
      const value = argv[++i];
      if (value === undefined) throw new AdapterError(`missing value for --${key}`);
      out.set(key, value);
    }
  }
  return out;
}

function required(args: Map<string, string | boolean>, key: string): string {
  const v = args.get(key);
  if (typeof v !== "string") throw new AdapterError(`missing required --${key}`);
  return v;
}

function contextOf(args: Map<string, string | boolean>): ContextLength {
  const raw = Number(required(args, "context"));
  if (!(CONTEXT_LENGTHS as readonly number[]).includes(raw)) {
    throw new AdapterError(`--context must be one of ${CONTEXT_LENGTHS.join(", ")}`);
  }
  return raw as ContextLength;
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (!command || command === "--help" || command === "-h") {
      console.log(usage());
      return command ? 0 : 1;
    }
    const args = parseArgs(rest);
    const log = args.get("log") === true;

    if (command === "init-checkpoint") {
      const config = defaultConfig(contextOf(args), log);
      saveCheckpoint(pretrainedCheckpoint(config), required(args, "out"));
      return 0;
    }

    if (command === "zero-shot" || command === "finetune") {
      const config = defaultConfig(contextOf(args), log,
                                   Number(args.get("seed") ?? 0));
      const data = readRvCsv(required(args, "data"));
      const symbol = required(args, "symbol");
      const series = data.get(symbol);
      if (!series) {
        throw new AdapterError(
          `symbol ${symbol} not in data (have ${[...data.keys()].join(", ")})`);
      }
      const ckpt = loadCheckpoint(required(args, "checkpoint"), config);
      const run =
        command === "zero-shot"
          ? zeroShotForecast(series, config, ckpt)
          : incrementalFinetune(series, config, ckpt, undefined,
                                (args.get("checkpoint-dir") as string) || undefined);
      auditNoLeakage(run);
      writeForecasts(run.rows, required(args, "out"));
      console.error(
        `${run.modelId}: ${run.rows.length} forecasts for ${symbol} -> ` +
          `${required(args, "out")}`);
      return 0;
    }

    throw new AdapterError(`unknown command ${command}\n${usage()}`);
  } catch (err) {
    if (err instanceof AdapterError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if (err && (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

const isEntry = process.argv[1] && import.meta.url === `file://${fs.realpathSync(process.argv[1])}`;
if (isEntry) {
  process.exit(main(process.argv.slice(2)));
}
