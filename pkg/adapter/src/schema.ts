import { z } from 'zod';

/** One line of the harness's dataset JSONL (raw method-pair triplets). */
export const datasetRow = z.object({
  example_id: z.string().min(1),
  repo_id: z.string(),
  commit_hash: z.string(),
  commit_time: z.string(),
  message: z.string(),
  file_path: z.string(),
  prior: z.array(z.string()),
  updated: z.array(z.string()),
});
export type DatasetRow = z.infer<typeof datasetRow>;

/** One line of the tokenized test JSONL produced by the tokenize stage. */
export const tokenizedRow = z.object({
  example_id: z.string().min(1),
  source: z.array(z.string()),
  target: z.array(z.string()),
  map: z.record(z.string()).optional(),
});
export type TokenizedRow = z.infer<typeof tokenizedRow>;

/** One line of the candidates JSONL consumed by the scoring harness. */
export const candidatesRow = z.object({
  example_id: z.string().min(1),
  candidates: z.array(z.array(z.string())),
});
export type CandidatesRow = z.infer<typeof candidatesRow>;
