import { beamSearch } from './beam';
import { Checkpoint, loadCheckpoint } from './checkpoint';
import { canonicalJson, readJsonl, writeJsonl } from './jsonl';
import { relex } from './lexer';
import { applyBpe, detokenize, loadMerges } from './merges';
import { candidatesRow, datasetRow, tokenizedRow } from './schema';
import { EOS, PAD, Transformer, UNK, BOS } from './transformer';

export interface AdapterJob {
  model: string; // 'echo' or a checkpoint path
  testPath: string;
  beamWidth: number;
  maxLen: number;
  outPath: string;
  mergesPath?: string;
}

export interface RunSummary {
  examples: number;
  failures: string[];
}

/** Echo stub: every example's single candidate is its own prior tokens. */
function echoCandidates(job: AdapterJob): Array<{ example_id: string; candidates: string[][] }> {
  const rows = readJsonl(job.testPath, datasetRow);
  return rows.map((row) => ({ example_id: row.example_id, candidates: [row.prior] }));
}

function checkpointCandidates(job: AdapterJob, failures: string[]) {
  const ckpt: Checkpoint = loadCheckpoint(job.model);
  const mode = String(ckpt.meta.mode ?? 'raw');
  if (mode.includes('abs')) {
    throw new Error(
      `checkpoint was trained in mode '${mode}'; this exporter handles raw/bpe checkpoints`,
    );
  }
  const table = job.mergesPath ? loadMerges(job.mergesPath) : null;
  if (mode === 'bpe' && !table) {
    throw new Error("mode 'bpe' checkpoint needs --merges");
  }
  const model = new Transformer(ckpt);
  const rows = readJsonl(job.testPath, tokenizedRow);
  const specials = new Set(ckpt.vocab.slice(0, 4));
  const out: Array<{ example_id: string; candidates: string[][] }> = [];
  for (const row of rows) {
    try {
      const source = model.encodeTokens(row.source);
      if (source.length > ckpt.config.max_seq_len) {
        throw new Error('source exceeds max_seq_len');
      }
      const maxLen = Math.min(job.maxLen, ckpt.config.max_seq_len - 1);
      const beams = beamSearch(model, source, job.beamWidth, maxLen);
      const candidates = beams.map((beam) => {
        const subwords = model.decodeTokens(beam.tokens).filter((t) => !specials.has(t));
        const tokens = table ? detokenize(subwords, table.marker) : subwords;
        return relex(tokens.join(' '));
      });
      out.push({ example_id: row.example_id, candidates });
    } catch (err) {
      failures.push(row.example_id);
      out.push({ example_id: row.example_id, candidates: [] });
    }
  }
  return out;
}

export function runJob(job: AdapterJob): RunSummary {
  const failures: string[] = [];
  const rows = job.model === 'echo' ? echoCandidates(job) : checkpointCandidates(job, failures);
  for (const row of rows) {
    candidatesRow.parse(row); // self-check: output must satisfy the schema
  }
  writeJsonl(job.outPath, rows);
  return { examples: rows.length, failures };
}

export { applyBpe, canonicalJson, relex, BOS, EOS, PAD, UNK };
