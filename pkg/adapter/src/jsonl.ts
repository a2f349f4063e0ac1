import * as fs from 'fs';
import { ZodType } from 'zod';

export function readJsonl<T>(path: string, schema: ZodType<T>): T[] {
  const text = fs.readFileSync(path, 'utf-8');
  const rows: T[] = [];
  for (const line of text.split('\n')) {
    if (!line.trim()) continue;
    rows.push(schema.parse(JSON.parse(line)));
  }
  return rows;
}

/** Byte-stable writer: sorted keys, compact separators, one row per line. */
export function writeJsonl(path: string, rows: object[]): void {
  const out = rows.map((row) => canonicalJson(row)).join('\n');
  fs.writeFileSync(path, out.length ? out + '\n' : '');
}

export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return '[' + value.map(canonicalJson).join(',') + ']';
  }
  if (value !== null && typeof value === 'object') {
    const keys = Object.keys(value as Record<string, unknown>).sort();
    const body = keys.map(
      (k) => JSON.stringify(k) + ':' + canonicalJson((value as Record<string, unknown>)[k]),
    );
    return '{' + body.join(',') + '}';
  }
  return JSON.stringify(value);
}
