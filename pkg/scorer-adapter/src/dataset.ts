// The built-in benchmark: seeded procedural grayscale patterns, one pattern
// family per class, degraded with noise and random phase so a small model
// cannot reach perfect accuracy. Real medical-imaging benchmark identifiers
// are recognized but need local data files this environment does not ship.
import { Rng } from './rng'

export const IMAGE_SIZE = 16
export const NUM_CLASSES = 7
export const BUILTIN_DATASET = 'synthmnist'
export const MEDMNIST_IDS = [
  'bloodmnist',
  'dermamnist',
  'pathmnist',
  'tissuemnist',
  'retinamnist',
  'organmnist3d',
]

export class DatasetUnavailableError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'DatasetUnavailable'
  }
}

export interface LabeledImages {
  /** count * IMAGE_SIZE * IMAGE_SIZE, row-major, values in [0, 1] */
  images: Float32Array
  labels: Int32Array
  count: number
}

function patternValue(cls: number, x: number, y: number, px: number, py: number): number {
  const size = IMAGE_SIZE
  switch (cls) {
    case 0: // horizontal stripes
      return (y + py) % 4 < 2 ? 1 : 0
    case 1: // vertical stripes
      return (x + px) % 4 < 2 ? 1 : 0
    case 2: // diagonal stripes
      return (x + y + px) % 5 < 2 ? 1 : 0
    case 3: // checkerboard
      return (Math.floor((x + px) / 2) + Math.floor((y + py) / 2)) % 2
    case 4: {
      // center blob
      const dx = x - size / 2 + (px % 3) - 1
      const dy = y - size / 2 + (py % 3) - 1
      return Math.exp(-(dx * dx + dy * dy) / 18)
    }
    case 5: // corner gradient
      return (x + y) / (2 * (size - 1))
    default: {
      // ring
      const dx = x - size / 2 + 0.5
      const dy = y - size / 2 + 0.5
      const r = Math.sqrt(dx * dx + dy * dy)
      return Math.abs(r - (4 + (px % 2))) < 1.5 ? 1 : 0
    }
  }
}

const NOISE_SIGMA = 0.55

export function generateImages(count: number, rng: Rng): LabeledImages {
  const images = new Float32Array(count * IMAGE_SIZE * IMAGE_SIZE)
  const labels = new Int32Array(count)
  for (let i = 0; i < count; i++) {
    const cls = rng.int(NUM_CLASSES)
    labels[i] = cls
    const px = rng.int(IMAGE_SIZE)
    const py = rng.int(IMAGE_SIZE)
    const brightness = 0.6 + 0.4 * rng.next()
    const base = i * IMAGE_SIZE * IMAGE_SIZE
    for (let y = 0; y < IMAGE_SIZE; y++) {
      for (let x = 0; x < IMAGE_SIZE; x++) {
        const clean = brightness * patternValue(cls, x, y, px, py)
        const noisy = clean + NOISE_SIGMA * rng.gaussian()
        images[base + y * IMAGE_SIZE + x] = Math.min(1, Math.max(0, noisy))
      }
    }
  }
  return { images, labels, count }
}

export interface DatasetSplits {
  train: LabeledImages
  val: LabeledImages
  test: LabeledImages
}

export interface DatasetSizes {
  train: number
  val: number
  test: number
}

export const DEFAULT_SIZES: DatasetSizes = { train: 1500, val: 2000, test: 3200 }

export function loadDataset(
  name: string,
  seed: number,
  sizes: DatasetSizes = DEFAULT_SIZES,
): DatasetSplits {
  if (name === BUILTIN_DATASET) {
    const rng = new Rng(seed)
    return {
      train: generateImages(sizes.train, rng),
      val: generateImages(sizes.val, rng),
      test: generateImages(sizes.test, rng),
    }
  }
  if (MEDMNIST_IDS.includes(name)) {
    throw new DatasetUnavailableError(
      `dataset '${name}' requires its local data files, which are not present; ` +
        `the built-in '${BUILTIN_DATASET}' benchmark needs no downloads`,
    )
  }
  throw new DatasetUnavailableError(
    `unknown dataset '${name}'; known: ${BUILTIN_DATASET}, ${MEDMNIST_IDS.join(', ')}`,
  )
}

/**
 * Seeded shuffle, then split by fractions. Cut points use cumulative
 * fractions of the total so part sizes differ from exact proportionality
 * by at most one and always sum to the input count.
 */
export function partitionByFractions(
  data: LabeledImages,
  fractions: number[],
  rng: Rng,
): LabeledImages[] {
  const order = rng.shuffle(Array.from({ length: data.count }, (_, i) => i))
  const pixels = IMAGE_SIZE * IMAGE_SIZE
  const parts: LabeledImages[] = []
  let cumulative = 0
  let start = 0
  for (let k = 0; k < fractions.length; k++) {
    cumulative += fractions[k]
    const end = k === fractions.length - 1 ? data.count : Math.round(cumulative * data.count)
    const indices = order.slice(start, end)
    const images = new Float32Array(indices.length * pixels)
    const labels = new Int32Array(indices.length)
    indices.forEach((src, dst) => {
      images.set(data.images.subarray(src * pixels, (src + 1) * pixels), dst * pixels)
      labels[dst] = data.labels[src]
    })
    parts.push({ images, labels, count: indices.length })
    start = end
  }
  return parts
}
