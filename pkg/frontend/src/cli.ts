#!/usr/bin/env node
/**
 * wpguard-export: bridge framework artifacts into the toolkit's file formats.
 *
 *   wpguard-export export-model <model.json|dir> <out.json>
 *   wpguard-export export-data  <in.csv> <out.csv> --label <name>
 *
 * Exit codes: 0 success, 1 usage error, 2 conversion error.
 */

import * as path from 'path';
import { fileURLToPath } from 'url';

import { exportModel, ExportError, UnsupportedLayerError } from './exporter.js';
import { exportDataset, DatasetExportError, NonNumericCellError } from './dataset.js';

function usage(): number {
  console.error('usage: wpguard-export export-model <in> <out>');
  console.error('       wpguard-export export-data <in> <out> --label <name>');
  return 1;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'export-model') {
      if (rest.length !== 2) return usage();
      const report = exportModel(rest[0], rest[1]);
      console.log(
        `exported ${report.layerCount} layers (${report.activations.join(', ')}) -> ${rest[1]}`,
      );
      for (const warning of report.warnings) console.warn(`warning: ${warning}`);
      return 0;
    }
    if (command === 'export-data') {
      const labelFlag = rest.indexOf('--label');
      if (labelFlag < 0 || rest.length !== 4) return usage();
      const label = rest[labelFlag + 1];
      const positional = rest.filter((_, i) => i !== labelFlag && i !== labelFlag + 1);
      if (positional.length !== 2 || !label) return usage();
      const report = exportDataset(positional[0], positional[1], label);
      console.log(
        `exported ${report.rows} rows, ${report.features} features + label -> ${positional[1]}`,
      );
      return 0;
    }
    return usage();
  } catch (error) {
    if (
      error instanceof ExportError ||
      error instanceof UnsupportedLayerError ||
      error instanceof DatasetExportError ||
      error instanceof NonNumericCellError
    ) {
      console.error(`error: ${error.message}`);
      return 2;
    }
    throw error;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  path.resolve(process.argv[1]) === fileURLToPath(import.meta.url);

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
