// Export pipeline: train once, score every split, write the two file
// formats the conformal toolkit consumes (score-matrix CSV and federation
// manifest JSON). One model serves all institutions, mirroring a shared
// federated model whose validation data stays distributed.
import * as fs from 'fs'
import * as path from 'path'

import {
  DatasetSizes,
  DEFAULT_SIZES,
  LabeledImages,
  loadDataset,
  NUM_CLASSES,
  partitionByFractions,
} from './dataset'
import { buildModel, ModelKind, predictProbs, trainModel } from './model'
import { Rng } from './rng'

export interface ExportJob {
  dataset: string
  /** one fraction per institution; must sum to 1 */
  fractions: number[]
  outDir: string
  epochs: number
  seed: number
  model: ModelKind
  alpha: number
  alphas: number[]
  sizes: DatasetSizes
}

export function defaultJob(overrides: Partial<ExportJob> = {}): ExportJob {
  return {
    dataset: 'synthmnist',
    fractions: [0.25, 0.25, 0.25, 0.25],
    outDir: 'exports',
    epochs: 3,
    seed: 7,
    model: 'cnn',
    alpha: 0.1,
    alphas: [0.05, 0.1, 0.2],
    sizes: DEFAULT_SIZES,
    ...overrides,
  }
}

export function validateJob(job: ExportJob): void {
  if (job.fractions.length < 1) {
    throw new Error('at least one institution fraction is required')
  }
  const total = job.fractions.reduce((a, b) => a + b, 0)
  if (Math.abs(total - 1.0) > 1e-9) {
    throw new Error(`institution fractions must sum to 1, got ${total}`)
  }
  if (job.fractions.some((f) => f <= 0)) {
    throw new Error('institution fractions must be positive')
  }
  if (job.epochs < 1) {
    throw new Error(`epochs must be >= 1, got ${job.epochs}`)
  }
}

/**
 * Round a softmax row to 6 decimals and repair the rounding residue on its
 * largest entry, so the written row sums to exactly 1.000000 and always
 * passes the toolkit's 1e-6 simplex check.
 */
export function roundSimplexRow(row: ArrayLike<number>): number[] {
  const rounded = Array.from(row, (v) => Math.round(v * 1e6) / 1e6)
  const sum = rounded.reduce((a, b) => a + b, 0)
  const residue = Math.round((1.0 - sum) * 1e6) / 1e6
  if (residue !== 0) {
    let argmax = 0
    for (let i = 1; i < rounded.length; i++) {
      if (rounded[i] > rounded[argmax]) argmax = i
    }
    rounded[argmax] = Math.round((rounded[argmax] + residue) * 1e6) / 1e6
  }
  return rounded
}

export function scoreMatrixCsv(labels: ArrayLike<number>, rows: number[][]): string {
  const header = 'label,' + Array.from({ length: NUM_CLASSES }, (_, i) => `c${i}`).join(',')
  const lines = [header]
  for (let i = 0; i < rows.length; i++) {
    const fixed = roundSimplexRow(rows[i]).map((v) => v.toFixed(6))
    lines.push(`${labels[i]},${fixed.join(',')}`)
  }
  return lines.join('\n') + '\n'
}

export interface ExportResult {
  validationFiles: string[]
  testFile: string
  manifestPath: string
}

export async function exportScores(job: ExportJob): Promise<ExportResult> {
  validateJob(job)
  const splits = loadDataset(job.dataset, job.seed, job.sizes)

  const model = buildModel(job.model, job.seed)
  await trainModel(model, splits.train, job.epochs)

  const valParts = partitionByFractions(splits.val, job.fractions, new Rng(job.seed + 101))
  const testParts = partitionByFractions(splits.test, job.fractions, new Rng(job.seed + 202))
  const firstInstitutionTest = testParts[0]

  fs.mkdirSync(job.outDir, { recursive: true })
  const validationFiles: string[] = []
  const institutions: object[] = []
  valParts.forEach((part: LabeledImages, i: number) => {
    const name = `val_${i}.csv`
    fs.writeFileSync(path.join(job.outDir, name), scoreMatrixCsv(part.labels, predictProbs(model, part)))
    validationFiles.push(name)
    institutions.push({ scores_path: name, noise_fraction: 0.0, seed: job.seed + i })
  })

  const testName = 'test_0.csv'
  fs.writeFileSync(
    path.join(job.outDir, testName),
    scoreMatrixCsv(firstInstitutionTest.labels, predictProbs(model, firstInstitutionTest)),
  )

  const manifest = {
    alpha: job.alpha,
    method: 'aps',
    institutions,
    test_path: testName,
    alphas: job.alphas,
    seeds: [job.seed],
  }
  const manifestPath = path.join(job.outDir, 'manifest.json')
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n')
  return { validationFiles, testFile: testName, manifestPath }
}
