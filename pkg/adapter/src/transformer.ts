/**
 * Forward-only transformer matching the harness checkpoint layout:
 * scaled embeddings + sinusoidal positions, post-norm encoder/decoder
 * blocks, ReLU feed-forward, causal decoder self-attention. Inference
 * only; each decode step recomputes the full prefix (test sets are tiny).
 */

import { Checkpoint } from './checkpoint';

export const PAD = 0;
export const BOS = 1;
export const EOS = 2;
export const UNK = 3;

type Mat = Float64Array[]; // row-major list of rows

function zeros(rows: number, cols: number): Mat {
  return Array.from({ length: rows }, () => new Float64Array(cols));
}

function matmulAdd(x: Mat, w: Float64Array, wCols: number, bias: Float64Array): Mat {
  const out = zeros(x.length, wCols);
  const inner = x[0]?.length ?? 0;
  for (let r = 0; r < x.length; r++) {
    const row = x[r];
    const o = out[r];
    o.set(bias);
    for (let i = 0; i < inner; i++) {
      const v = row[i];
      if (v === 0) continue;
      const base = i * wCols;
      for (let j = 0; j < wCols; j++) {
        o[j] += v * w[base + j];
      }
    }
  }
  return out;
}

function layerNorm(x: Mat, gamma: Float64Array, beta: Float64Array): Mat {
  const eps = 1e-5;
  return x.map((row) => {
    const d = row.length;
    let mean = 0;
    for (let i = 0; i < d; i++) mean += row[i];
    mean /= d;
    let variance = 0;
    for (let i = 0; i < d; i++) variance += (row[i] - mean) ** 2;
    variance /= d;
    const inv = 1 / Math.sqrt(variance + eps);
    const out = new Float64Array(d);
    for (let i = 0; i < d; i++) out[i] = (row[i] - mean) * inv * gamma[i] + beta[i];
    return out;
  });
}

function addRows(a: Mat, b: Mat): Mat {
  return a.map((row, r) => {
    const out = new Float64Array(row.length);
    for (let i = 0; i < row.length; i++) out[i] = row[i] + b[r][i];
    return out;
  });
}

function softmaxInPlace(row: Float64Array): void {
  let max = -Infinity;
  for (const v of row) max = Math.max(max, v);
  let sum = 0;
  for (let i = 0; i < row.length; i++) {
    row[i] = Math.exp(row[i] - max);
    sum += row[i];
  }
  for (let i = 0; i < row.length; i++) row[i] /= sum;
}

export class Transformer {
  private readonly t: Map<string, Float64Array>;
  readonly cfg: Checkpoint['config'];
  readonly vocab: string[];
  private readonly pe: Mat;

  constructor(ckpt: Checkpoint) {
    this.cfg = ckpt.config;
    this.vocab = ckpt.vocab;
    this.t = new Map();
    for (const [name, { data }] of ckpt.tensors) {
      this.t.set(name, Float64Array.from(data));
    }
    this.pe = zeros(this.cfg.max_seq_len, this.cfg.d_model);
    for (let pos = 0; pos < this.cfg.max_seq_len; pos++) {
      for (let i = 0; i < this.cfg.d_model; i++) {
        const angle = pos / Math.pow(10000, (2 * Math.floor(i / 2)) / this.cfg.d_model);
        this.pe[pos][i] = i % 2 === 0 ? Math.sin(angle) : Math.cos(angle);
      }
    }
  }

  private weight(name: string): Float64Array {
    const w = this.t.get(name);
    if (!w) throw new Error(`checkpoint tensor missing: ${name}`);
    return w;
  }

  private embed(ids: number[]): Mat {
    const d = this.cfg.d_model;
    const table = this.weight('embed');
    const scale = Math.sqrt(d);
    return ids.map((id, pos) => {
      const out = new Float64Array(d);
      for (let i = 0; i < d; i++) out[i] = table[id * d + i] * scale + this.pe[pos][i];
      return out;
    });
  }

  /** Multi-head attention; mask[q][k] === false hides the pair. */
  private attention(
    prefix: string,
    xq: Mat,
    xkv: Mat,
    visible: (q: number, k: number) => boolean,
  ): Mat {
    const d = this.cfg.d_model;
    const h = this.cfg.num_heads;
    const dk = d / h;
    const q = matmulAdd(xq, this.weight(`${prefix}.Wq`), d, this.weight(`${prefix}.bq`));
    const k = matmulAdd(xkv, this.weight(`${prefix}.Wk`), d, this.weight(`${prefix}.bk`));
    const v = matmulAdd(xkv, this.weight(`${prefix}.Wv`), d, this.weight(`${prefix}.bv`));
    const merged = zeros(xq.length, d);
    const scale = 1 / Math.sqrt(dk);
    for (let head = 0; head < h; head++) {
      const off = head * dk;
      for (let qi = 0; qi < xq.length; qi++) {
        const scores = new Float64Array(xkv.length);
        for (let ki = 0; ki < xkv.length; ki++) {
          if (!visible(qi, ki)) {
            scores[ki] = -1e9;
            continue;
          }
          let dot = 0;
          for (let i = 0; i < dk; i++) dot += q[qi][off + i] * k[ki][off + i];
          scores[ki] = dot * scale;
        }
        softmaxInPlace(scores);
        for (let ki = 0; ki < xkv.length; ki++) {
          const w = scores[ki];
          if (w === 0) continue;
          for (let i = 0; i < dk; i++) merged[qi][off + i] += w * v[ki][off + i];
        }
      }
    }
    return matmulAdd(merged, this.weight(`${prefix}.Wo`), d, this.weight(`${prefix}.bo`));
  }

  private ffn(prefix: string, x: Mat): Mat {
    const hidden = matmulAdd(x, this.weight(`${prefix}.W1`), this.cfg.ffn_dim, this.weight(`${prefix}.b1`));
    for (const row of hidden) {
      for (let i = 0; i < row.length; i++) row[i] = Math.max(0, row[i]);
    }
    return matmulAdd(hidden, this.weight(`${prefix}.W2`), this.cfg.d_model, this.weight(`${prefix}.b2`));
  }

  private sublayer(ln: string, x: Mat, sub: Mat): Mat {
    return layerNorm(addRows(x, sub), this.weight(`${ln}.g`), this.weight(`${ln}.b`));
  }

  encode(source: number[]): Mat {
    const visible = (_q: number, k: number) => source[k] !== PAD;
    let x = this.embed(source);
    for (let i = 0; i < this.cfg.encoder_layers; i++) {
      x = this.sublayer(`enc${i}.ln1`, x, this.attention(`enc${i}.attn`, x, x, visible));
      x = this.sublayer(`enc${i}.ln2`, x, this.ffn(`enc${i}.ffn`, x));
    }
    return x;
  }

  /** Log-probabilities over the vocabulary after the BOS-led prefix. */
  decodeStep(H: Mat, source: number[], prefix: number[]): Float64Array {
    const causal = (q: number, k: number) => k <= q;
    const crossVisible = (_q: number, k: number) => source[k] !== PAD;
    let x = this.embed(prefix);
    for (let i = 0; i < this.cfg.decoder_layers; i++) {
      x = this.sublayer(`dec${i}.ln1`, x, this.attention(`dec${i}.self`, x, x, causal));
      x = this.sublayer(`dec${i}.ln2`, x, this.attention(`dec${i}.cross`, x, H, crossVisible));
      x = this.sublayer(`dec${i}.ln3`, x, this.ffn(`dec${i}.ffn`, x));
    }
    const last = [x[x.length - 1]];
    const logits = matmulAdd(last, this.weight('out.W'), this.cfg.vocab_size, this.weight('out.b'))[0];
    let max = -Infinity;
    for (const v of logits) max = Math.max(max, v);
    let sum = 0;
    for (const v of logits) sum += Math.exp(v - max);
    const logZ = max + Math.log(sum);
    const out = new Float64Array(logits.length);
    for (let i = 0; i < logits.length; i++) out[i] = logits[i] - logZ;
    return out;
  }

  encodeTokens(subwords: string[]): number[] {
    const index = new Map(this.vocab.map((tok, i) => [tok, i] as const));
    return subwords.map((s) => index.get(s) ?? UNK);
  }

  decodeTokens(ids: number[]): string[] {
    return ids.map((i) => this.vocab[i]);
  }
}
