// Usage:
//   node dist/cli.js --out-dir exports [--dataset synthmnist] [--epochs 3]
//                    [--clients 4 | --fractions 0.4,0.2,0.2,0.2]
//                    [--seed 7] [--model cnn|mlp]
import { parseArgs } from 'util'

import { DatasetUnavailableError } from './dataset'
import { defaultJob, exportScores } from './export'
import { ModelKind } from './model'
import { TrainingFailureError } from './model'

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: {
      dataset: { type: 'string', default: 'synthmnist' },
      'out-dir': { type: 'string', default: 'exports' },
      epochs: { type: 'string', default: '3' },
      clients: { type: 'string', default: '4' },
      fractions: { type: 'string' },
      seed: { type: 'string', default: '7' },
      model: { type: 'string', default: 'cnn' },
      alpha: { type: 'string', default: '0.1' },
      help: { type: 'boolean', default: false },
    },
  })
  if (values.help) {
    console.log(
      'scorer-adapter: train a small classifier and export score matrices + manifest\n' +
        '  --dataset NAME    benchmark to use (default synthmnist)\n' +
        '  --out-dir DIR     where score files and manifest.json go\n' +
        '  --epochs N        training epochs (default 3)\n' +
        '  --clients K       equal-split institutions (default 4)\n' +
        '  --fractions CSV   explicit per-institution fractions summing to 1\n' +
        '  --seed N          master seed (default 7)\n' +
        '  --model KIND      cnn (default) or mlp\n' +
        '  --alpha A         manifest miscoverage level (default 0.1)',
    )
    return 0
  }

  const clients = parseInt(values.clients as string, 10)
  const fractions = values.fractions
    ? (values.fractions as string).split(',').map(Number)
    : Array.from({ length: clients }, () => 1 / clients)
  const job = defaultJob({
    dataset: values.dataset as string,
    outDir: values['out-dir'] as string,
    epochs: parseInt(values.epochs as string, 10),
    seed: parseInt(values.seed as string, 10),
    model: values.model as ModelKind,
    alpha: parseFloat(values.alpha as string),
    fractions,
  })
  const result = await exportScores(job)
  for (const file of result.validationFiles) console.log(`wrote ${job.outDir}/${file}`)
  console.log(`wrote ${job.outDir}/${result.testFile}`)
  console.log(`wrote ${result.manifestPath}`)
  return 0
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    if (err instanceof DatasetUnavailableError || err instanceof TrainingFailureError) {
      console.error(`${err.name}: ${err.message}`)
    } else {
      console.error(`error: ${err instanceof Error ? err.message : err}`)
    }
    process.exit(1)
  })
