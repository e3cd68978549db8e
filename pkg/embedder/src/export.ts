import { renameSync, writeFileSync } from 'node:fs';

import { Encoder, loadEncoder } from './encoder';
import { applyProjection, buildProjection, serializeProjection } from './projection';
import { UserPosts, readUsers } from './users';

export const OUTPUT_DIM = 512;

export interface ExporterConfig {
  usersPath: string;
  outPath: string;
  modelTag: string;
  seed: number;
  batchSize: number;
  maxPostsPerUser: number;
}

export const DEFAULT_CONFIG = {
  modelTag: 'hashed-768',
  seed: 42,
  batchSize: 64,
  maxPostsPerUser: 1000,
};

/** Mean over post vectors; a user with no posts maps to the zero vector. */
export function poolPosts(encoder: Encoder, texts: string[]): Float64Array {
  const out = new Float64Array(encoder.width);
  if (texts.length === 0) return out;
  for (const text of texts) {
    const vector = encoder.encodeText(text);
    for (let i = 0; i < encoder.width; i++) out[i] += vector[i];
  }
  for (let i = 0; i < encoder.width; i++) out[i] /= texts.length;
  return out;
}

function formatValue(value: number): string {
  // shortest round-trip form; exceeds the %.8g floor required downstream
  return Object.is(value, -0) ? '0' : String(value);
}

export interface ExportResult {
  rows: number;
  warnings: string[];
  projectionPath: string | null;
}

export function runExport(config: ExporterConfig): ExportResult {
  const encoder = loadEncoder(config.modelTag);
  const users = readUsers(config.usersPath);
  const warnings: string[] = [];

  const projection =
    encoder.width === OUTPUT_DIM
      ? null
      : buildProjection(config.seed, encoder.width, OUTPUT_DIM);

  const lines: string[] = [`#dim=${OUTPUT_DIM}\tmodel=${config.modelTag}`];
  for (let start = 0; start < users.length; start += config.batchSize) {
    for (const user of users.slice(start, start + config.batchSize)) {
      lines.push(encodeUser(encoder, user, config.maxPostsPerUser, projection, warnings));
    }
  }

  const tmpPath = `${config.outPath}.tmp`;
  writeFileSync(tmpPath, lines.join('\n') + '\n', 'utf8');
  renameSync(tmpPath, config.outPath);

  let projectionPath: string | null = null;
  if (projection) {
    projectionPath = `${config.outPath}.projection.json`;
    writeFileSync(projectionPath, serializeProjection(projection) + '\n', 'utf8');
  }
  return { rows: users.length, warnings, projectionPath };
}

function encodeUser(
  encoder: Encoder,
  user: UserPosts,
  maxPosts: number,
  projection: ReturnType<typeof buildProjection> | null,
  warnings: string[],
): string {
  if (user.texts.length === 0) {
    warnings.push(`user ${user.userId} has no posts; wrote a zero vector`);
  }
  const pooled = poolPosts(encoder, user.texts.slice(0, maxPosts));
  const vector = projection ? applyProjection(projection, pooled) : pooled;
  const cells = new Array<string>(vector.length);
  for (let i = 0; i < vector.length; i++) cells[i] = formatValue(vector[i]);
  return `${user.userId}\t${cells.join('\t')}`;
}
