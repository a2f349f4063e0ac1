import { BOS, EOS, Transformer } from './transformer';

export interface Candidate {
  tokens: number[];
  logProb: number;
  terminated: boolean;
}

function compareCandidates(a: Candidate, b: Candidate): number {
  if (a.logProb !== b.logProb) return b.logProb - a.logProb;
  const n = Math.min(a.tokens.length, b.tokens.length);
  for (let i = 0; i < n; i++) {
    if (a.tokens[i] !== b.tokens[i]) return a.tokens[i] - b.tokens[i];
  }
  return a.tokens.length - b.tokens.length;
}

/**
 * Beam search with raw summed log-probabilities (no length penalty) and
 * lexicographic token-id tie-breaking, mirroring the harness semantics:
 * hypotheses freeze on EOS; the search stops when the beamWidth best are
 * all frozen or maxLen is reached.
 */
export function beamSearch(
  model: Transformer,
  source: number[],
  beamWidth: number,
  maxLen: number,
): Candidate[] {
  if (beamWidth < 1) throw new Error('beamWidth must be >= 1');
  const H = model.encode(source);
  let live: Candidate[] = [{ tokens: [], logProb: 0, terminated: false }];
  let frozen: Candidate[] = [];
  for (let step = 0; step < maxLen; step++) {
    const pool: Candidate[] = [...frozen];
    for (const beam of live) {
      const logp = model.decodeStep(H, source, [BOS, ...beam.tokens]);
      for (let tok = 0; tok < logp.length; tok++) {
        pool.push({
          tokens: [...beam.tokens, tok],
          logProb: beam.logProb + logp[tok],
          terminated: tok === EOS,
        });
      }
    }
    pool.sort(compareCandidates);
    const selected = pool.slice(0, beamWidth);
    frozen = selected.filter((c) => c.terminated);
    live = selected.filter((c) => !c.terminated);
    if (live.length === 0) break;
  }
  return [...frozen, ...live].sort(compareCandidates).slice(0, beamWidth);
}
