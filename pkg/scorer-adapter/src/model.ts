import * as tf from '@tensorflow/tfjs'

import { IMAGE_SIZE, LabeledImages, NUM_CLASSES } from './dataset'

export class TrainingFailureError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'TrainingFailure'
  }
}

export type ModelKind = 'cnn' | 'mlp'

/** Small softmax classifier with seeded initializers. */
export function buildModel(kind: ModelKind, seed: number): tf.Sequential {
  const model = tf.sequential()
  if (kind === 'cnn') {
    model.add(
      tf.layers.conv2d({
        inputShape: [IMAGE_SIZE, IMAGE_SIZE, 1],
        filters: 8,
        kernelSize: 3,
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed }),
      }),
    )
    model.add(tf.layers.maxPooling2d({ poolSize: 2 }))
    model.add(tf.layers.flatten())
  } else {
    model.add(tf.layers.flatten({ inputShape: [IMAGE_SIZE, IMAGE_SIZE, 1] }))
    model.add(
      tf.layers.dense({
        units: 32,
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed }),
      }),
    )
  }
  model.add(
    tf.layers.dense({
      units: NUM_CLASSES,
      activation: 'softmax',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    }),
  )
  model.compile({ optimizer: tf.train.adam(0.002), loss: 'sparseCategoricalCrossentropy' })
  return model
}

function toTensors(data: LabeledImages): { xs: tf.Tensor4D; ys: tf.Tensor1D } {
  const xs = tf.tensor4d(data.images, [data.count, IMAGE_SIZE, IMAGE_SIZE, 1])
  // sparseCategoricalCrossentropy floors its label tensor, which must be float32
  const ys = tf.tensor1d(Float32Array.from(data.labels), 'float32')
  return { xs, ys }
}

export async function trainModel(
  model: tf.Sequential,
  data: LabeledImages,
  epochs: number,
  batchSize = 32,
): Promise<void> {
  const { xs, ys } = toTensors(data)
  try {
    // data order is already a seeded draw; keep fit() from reshuffling so
    // runs with equal seeds follow identical batch sequences
    await model.fit(xs, ys, { epochs, batchSize, shuffle: false, verbose: 0 })
  } catch (err) {
    throw new TrainingFailureError(`model training failed: ${(err as Error).message}`)
  } finally {
    xs.dispose()
    ys.dispose()
  }
}

/** Softmax rows for every example, in input order. */
export function predictProbs(model: tf.Sequential, data: LabeledImages): number[][] {
  const xs = tf.tensor4d(data.images, [data.count, IMAGE_SIZE, IMAGE_SIZE, 1])
  try {
    const out = model.predict(xs, { batchSize: 256 }) as tf.Tensor2D
    const flat = out.dataSync()
    out.dispose()
    const rows: number[][] = []
    for (let i = 0; i < data.count; i++) {
      rows.push(Array.from(flat.subarray(i * NUM_CLASSES, (i + 1) * NUM_CLASSES)))
    }
    return rows
  } finally {
    xs.dispose()
  }
}
