import { createHash } from 'node:crypto';

/**
 * Deterministic 32-bit PRNG (mulberry32). Only 32-bit integer ops and one
 * float division, so the stream is identical on every platform.
 */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** First four bytes of sha256(text) as an unsigned 32-bit seed. */
export function seedFromString(text: string): number {
  const digest = createHash('sha256').update(text, 'utf8').digest();
  return digest.readUInt32BE(0);
}

/** Standard-normal draws via Box-Muller over a mulberry32 stream. */
export function gaussian(next: () => number): () => number {
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) u = next();
    const v = next();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    spare = radius * Math.sin(2.0 * Math.PI * v);
    return radius * Math.cos(2.0 * Math.PI * v);
  };
}
