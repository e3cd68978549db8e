#!/usr/bin/env node
import { DEFAULT_CONFIG, ExporterConfig, runExport } from './export';

const USAGE = `usage: embedder export --users FILE --out FILE [options]

Encode each user's post texts and write one 512-dim embedding row per user.

options:
  --users FILE   line-delimited user records (profile + posts)   [required]
  --out FILE     output TSV path                                 [required]
  --model TAG    encoder tag (default ${DEFAULT_CONFIG.modelTag})
  --batch N      users encoded per batch (default ${DEFAULT_CONFIG.batchSize})
  --seed INT     seed for the dimension projection (default ${DEFAULT_CONFIG.seed})
  --max-posts N  cap on posts pooled per user (default ${DEFAULT_CONFIG.maxPostsPerUser})
`;

function parseArgs(argv: string[]): ExporterConfig {
  if (argv[0] !== 'export') {
    throw new Error(USAGE);
  }
  const options = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new Error(`bad argument ${flag}\n${USAGE}`);
    }
    options.set(flag.slice(2), value);
  }
  const usersPath = options.get('users');
  const outPath = options.get('out');
  if (!usersPath || !outPath) {
    throw new Error(`--users and --out are required\n${USAGE}`);
  }
  const intOption = (name: string, fallback: number) => {
    const raw = options.get(name);
    if (raw === undefined) return fallback;
    const value = parseInt(raw, 10);
    if (!Number.isFinite(value) || value <= 0) {
      throw new Error(`--${name} must be a positive integer, got ${raw}`);
    }
    return value;
  };
  return {
    usersPath,
    outPath,
    modelTag: options.get('model') ?? DEFAULT_CONFIG.modelTag,
    seed: intOption('seed', DEFAULT_CONFIG.seed),
    batchSize: intOption('batch', DEFAULT_CONFIG.batchSize),
    maxPostsPerUser: intOption('max-posts', DEFAULT_CONFIG.maxPostsPerUser),
  };
}

function main(): number {
  try {
    const config = parseArgs(process.argv.slice(2));
    const result = runExport(config);
    for (const warning of result.warnings) {
      process.stderr.write(`warning: ${warning}\n`);
    }
    process.stdout.write(
      `export: ${result.rows} users -> ${config.outPath}` +
        (result.projectionPath ? ` (projection: ${result.projectionPath})` : '') +
        '\n',
    );
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

process.exit(main());
