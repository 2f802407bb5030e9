/**
 * Convert a tabular source into the header CSV the wpguard CLI ingests:
 * every non-label cell a decimal real, labels 0/1.
 */

import * as fs from 'fs';

export class NonNumericCellError extends Error {
  constructor(
    message: string,
    public readonly row: number,
    public readonly column: string,
  ) {
    super(message);
    this.name = 'NonNumericCellError';
  }
}

export class DatasetExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'DatasetExportError';
  }
}

export interface DatasetReport {
  rows: number;
  features: number;
  columns: number;
}

function splitLine(line: string): string[] {
  return line.split(',').map((cell) => cell.trim());
}

export function exportDataset(
  inputPath: string,
  outPath: string,
  labelColumn: string,
): DatasetReport {
  const text = fs.readFileSync(inputPath, 'utf8');
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== '');
  if (lines.length === 0) {
    throw new DatasetExportError(`${inputPath}: file is empty`);
  }
  const header = splitLine(lines[0]);
  const labelIndex = header.indexOf(labelColumn);
  if (labelIndex < 0) {
    throw new DatasetExportError(
      `${inputPath}: label column '${labelColumn}' not in header [${header.join(', ')}]`,
    );
  }
  if (lines.length === 1) {
    throw new DatasetExportError(`${inputPath}: no data rows`);
  }

  const outputLines = [header.join(',')];
  for (let r = 1; r < lines.length; r++) {
    const cells = splitLine(lines[r]);
    if (cells.length !== header.length) {
      throw new DatasetExportError(
        `${inputPath}: row ${r - 1} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const rendered = cells.map((cell, c) => {
      const value = Number(cell);
      if (cell === '' || !Number.isFinite(value)) {
        throw new NonNumericCellError(
          `${inputPath}: row ${r - 1}, column '${header[c]}': ` +
            `cannot read '${cell}' as a real number`,
          r - 1,
          header[c],
        );
      }
      if (c === labelIndex && value !== 0 && value !== 1) {
        throw new DatasetExportError(
          `${inputPath}: row ${r - 1}: label must be 0 or 1, got '${cell}'`,
        );
      }
      return String(value);
    });
    outputLines.push(rendered.join(','));
  }

  fs.writeFileSync(outPath, outputLines.join('\n') + '\n');
  return {
    rows: lines.length - 1,
    features: header.length - 1,
    columns: header.length,
  };
}
