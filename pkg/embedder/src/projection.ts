import { gaussian, mulberry32 } from './rng';

export interface Projection {
  inDim: number;
  outDim: number;
  seed: number;
  /** row-major outDim x inDim */
  matrix: Float64Array;
}

/**
 * Seeded random orthonormal projection: Gram-Schmidt over Gaussian rows.
 * Requires outDim <= inDim so the rows can stay mutually orthogonal.
 */
export function buildProjection(seed: number, inDim: number, outDim: number): Projection {
  if (outDim > inDim) {
    throw new Error(`cannot project ${inDim} dims up to ${outDim}`);
  }
  const draw = gaussian(mulberry32(seed));
  const rows: Float64Array[] = [];
  while (rows.length < outDim) {
    const row = new Float64Array(inDim);
    for (let i = 0; i < inDim; i++) row[i] = draw();
    for (const prev of rows) {
      let dot = 0;
      for (let i = 0; i < inDim; i++) dot += row[i] * prev[i];
      for (let i = 0; i < inDim; i++) row[i] -= dot * prev[i];
    }
    let norm = 0;
    for (let i = 0; i < inDim; i++) norm += row[i] * row[i];
    norm = Math.sqrt(norm);
    if (norm < 1e-8) continue; // degenerate draw, take another
    for (let i = 0; i < inDim; i++) row[i] /= norm;
    rows.push(row);
  }
  const matrix = new Float64Array(outDim * inDim);
  rows.forEach((row, r) => matrix.set(row, r * inDim));
  return { inDim, outDim, seed, matrix };
}

export function applyProjection(projection: Projection, vector: Float64Array): Float64Array {
  if (vector.length !== projection.inDim) {
    throw new Error(
      `projection expects ${projection.inDim} dims, got ${vector.length}`,
    );
  }
  const out = new Float64Array(projection.outDim);
  for (let r = 0; r < projection.outDim; r++) {
    let sum = 0;
    const offset = r * projection.inDim;
    for (let i = 0; i < projection.inDim; i++) {
      sum += projection.matrix[offset + i] * vector[i];
    }
    out[r] = sum;
  }
  return out;
}

/** JSON payload persisted next to the embedding file. */
export function serializeProjection(projection: Projection): string {
  const bytes = Buffer.from(
    projection.matrix.buffer,
    projection.matrix.byteOffset,
    projection.matrix.byteLength,
  );
  return JSON.stringify(
    {
      kind: 'orthonormal-projection',
      seed: projection.seed,
      in_dim: projection.inDim,
      out_dim: projection.outDim,
      matrix_base64_f64le: bytes.toString('base64'),
    },
    null,
    2,
  );
}
