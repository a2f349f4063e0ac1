#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { runJob } from './generate';

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .usage('Export ranked candidate updates into the scoring harness candidates JSONL.')
    .option('model', {
      type: 'string',
      demandOption: true,
      describe: "'echo' or a path to a harness checkpoint (.ckpt)",
    })
    .option('test', {
      type: 'string',
      demandOption: true,
      describe: 'test set JSONL (raw for echo, tokenized for checkpoints)',
    })
    .option('beam', { type: 'number', default: 15, describe: 'beam width' })
    .option('max-len', { type: 'number', default: 96, describe: 'max generated length' })
    .option('merges', { type: 'string', describe: 'BPE merges file for bpe-mode checkpoints' })
    .option('out', { type: 'string', demandOption: true, describe: 'output candidates JSONL' })
    .strict()
    .parse();

  const summary = runJob({
    model: argv.model,
    testPath: argv.test,
    beamWidth: argv.beam,
    maxLen: argv['max-len'],
    mergesPath: argv.merges,
    outPath: argv.out,
  });
  console.log(`wrote ${summary.examples} candidate rows to ${argv.out}`);
  if (summary.failures.length > 0) {
    console.error(`generation failed for ${summary.failures.length} example(s): ${summary.failures.join(', ')}`);
  }
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(String(err?.message ?? err));
    process.exit(1);
  },
);
