import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { execFileSync } from 'child_process';

import '@tensorflow/tfjs-backend-cpu';
import * as tf from '@tensorflow/tfjs-core';
import type { LayersModel } from '@tensorflow/tfjs-layers';

/** Write a LayersModel to disk in the standard artifact layout. */
export async function saveArtifacts(model: LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData!;
      const buffers = Array.isArray(weightData) ? weightData : [weightData];
      fs.writeFileSync(
        path.join(dir, 'weights.bin'),
        Buffer.concat(buffers.map((b) => Buffer.from(b))),
      );
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
          format: 'layers-model',
        }),
      );
      return {
        modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' as const },
      };
    }),
  );
}

export function makeTempDir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

/** Random input rows rounded to float32 so both runtimes consume identical values. */
export function randomRows(nRows: number, nFeatures: number, scale = 2.0): number[][] {
  const rows: number[][] = [];
  for (let r = 0; r < nRows; r++) {
    const row: number[] = [];
    for (let c = 0; c < nFeatures; c++) {
      row.push(Math.fround((Math.random() * 2 - 1) * scale));
    }
    rows.push(row);
  }
  return rows;
}

export function writeInputCsv(rows: number[][], filePath: string): void {
  const header = rows[0].map((_, i) => `f${i}`).join(',');
  const lines = rows.map((row) => row.map((v) => v.toPrecision(17)).join(','));
  fs.writeFileSync(filePath, [header, ...lines].join('\n') + '\n');
}

/** Forward outputs (first output unit) from the primary toolkit's CLI. */
export function primaryPredict(modelPath: string, rows: number[][], workDir: string): number[] {
  const inputCsv = path.join(workDir, 'inputs.csv');
  writeInputCsv(rows, inputCsv);
  execFileSync(
    'python3',
    ['-m', 'wpguard.cli', 'predict', '--model', modelPath, '--data', inputCsv,
     '--out', workDir],
    { stdio: 'pipe' },
  );
  const lines = fs
    .readFileSync(path.join(workDir, 'predictions.csv'), 'utf8')
    .trim()
    .split('\n')
    .slice(1);
  return lines.map((line) => Number(line.split(',')[1]));
}

/** Framework-side outputs (first output unit) for the same rows. */
export function frameworkPredict(model: LayersModel, rows: number[][]): number[] {
  return tf.tidy(() => {
    const outputs = model.predict(tf.tensor2d(rows)) as tf.Tensor;
    const flat = tf.reshape(outputs, [rows.length, -1]);
    const values = flat.arraySync() as number[][];
    return values.map((row) => row[0]);
  });
}

export function maxAbsDiff(a: number[], b: number[]): number {
  let worst = 0;
  for (let i = 0; i < a.length; i++) {
    worst = Math.max(worst, Math.abs(a[i] - b[i]));
  }
  return worst;
}
