import * as fs from 'fs';

/** Model hyperparameters stored in the checkpoint's config JSON. */
export interface ModelConfig {
  vocab_size: number;
  d_model: number;
  num_heads: number;
  encoder_layers: number;
  decoder_layers: number;
  ffn_dim: number;
  max_seq_len: number;
  dropout: number;
  seed: number;
  dtype: string;
}

export interface Checkpoint {
  config: ModelConfig;
  vocab: string[];
  meta: Record<string, unknown>;
  tensors: Map<string, { shape: number[]; data: Float32Array }>;
}

const MAGIC = 'UBCP';
const VERSION = 1;

/**
 * Parses the harness checkpoint container:
 *   "UBCP" | u32 version | u32 configLen | config JSON
 *   | u32 tensorCount | per tensor (u16 nameLen, name, u8 ndim, u32*dims)
 *   | concatenated float32 LE data in index order.
 */
export function loadCheckpoint(path: string): Checkpoint {
  const buf = fs.readFileSync(path);
  if (buf.subarray(0, 4).toString('ascii') !== MAGIC) {
    throw new Error(`${path}: not an updatebench checkpoint`);
  }
  let offset = 4;
  const version = buf.readUInt32LE(offset);
  offset += 4;
  if (version !== VERSION) {
    throw new Error(`${path}: unsupported checkpoint version ${version}`);
  }
  const configLen = buf.readUInt32LE(offset);
  offset += 4;
  const header = JSON.parse(buf.subarray(offset, offset + configLen).toString('utf-8'));
  offset += configLen;
  const count = buf.readUInt32LE(offset);
  offset += 4;
  const index: Array<{ name: string; shape: number[] }> = [];
  for (let i = 0; i < count; i++) {
    const nameLen = buf.readUInt16LE(offset);
    offset += 2;
    const name = buf.subarray(offset, offset + nameLen).toString('utf-8');
    offset += nameLen;
    const ndim = buf.readUInt8(offset);
    offset += 1;
    const shape: number[] = [];
    for (let d = 0; d < ndim; d++) {
      shape.push(buf.readUInt32LE(offset));
      offset += 4;
    }
    index.push({ name, shape });
  }
  const tensors = new Map<string, { shape: number[]; data: Float32Array }>();
  for (const { name, shape } of index) {
    const n = shape.reduce((a, b) => a * b, 1);
    const data = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      data[i] = buf.readFloatLE(offset);
      offset += 4;
    }
    tensors.set(name, { shape, data });
  }
  return {
    config: header.model as ModelConfig,
    vocab: header.vocab as string[],
    meta: (header.meta ?? {}) as Record<string, unknown>,
    tensors,
  };
}
