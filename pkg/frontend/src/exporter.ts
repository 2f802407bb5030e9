/**
 * Convert tfjs-layers model artifacts (model.json + weight shards) into the
 * wpguard model interchange JSON.
 *
 * Only sequential stacks of Dense layers with linear/relu/sigmoid/tanh
 * activations are convertible; anything else is rejected by name rather than
 * approximated, since a skipped or faked layer would silently change what the
 * downstream bounds inference reasons about. Kernels are stored [in, out] in
 * the framework and transposed here to the interchange orientation
 * (out_dim x in_dim), so the consumer never special-cases orientation.
 */

import * as fs from 'fs';
import * as path from 'path';

export const SUPPORTED_ACTIVATIONS = new Set(['linear', 'relu', 'sigmoid', 'tanh']);

export class UnsupportedLayerError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'UnsupportedLayerError';
  }
}

export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ExportError';
  }
}

export interface ExportReport {
  layerCount: number;
  activations: string[];
  warnings: string[];
}

export interface InterchangeLayer {
  weights: number[][];
  bias: number[];
  activation: string;
}

export interface InterchangeModel {
  name: string;
  input_dim: number;
  layers: InterchangeLayer[];
}

interface WeightSpec {
  name: string;
  shape: number[];
  dtype: string;
}

interface LayerConfig {
  class_name: string;
  config: {
    name?: string;
    activation?: string;
    units?: number;
    use_bias?: boolean;
    [key: string]: unknown;
  };
}

interface NamedTensor {
  shape: number[];
  values: Float32Array;
}

function resolveModelJsonPath(inputPath: string): string {
  const stats = fs.statSync(inputPath);
  return stats.isDirectory() ? path.join(inputPath, 'model.json') : inputPath;
}

function topologyLayers(modelTopology: any): LayerConfig[] {
  // tfjs saves the Keras config directly; the python converter nests it
  // under model_config
  const config = modelTopology.model_config ?? modelTopology;
  if (!config || !config.config || !Array.isArray(config.config.layers)) {
    throw new ExportError('model.json carries no layer list (not a layers model?)');
  }
  if (config.class_name && config.class_name !== 'Sequential') {
    throw new ExportError(
      `only sequential models are convertible, got ${config.class_name}`,
    );
  }
  return config.config.layers as LayerConfig[];
}

function readWeightTable(modelJsonPath: string, manifest: any[]): Map<string, NamedTensor> {
  const baseDir = path.dirname(modelJsonPath);
  const table = new Map<string, NamedTensor>();
  for (const group of manifest) {
    const buffers = (group.paths as string[]).map((p) =>
      fs.readFileSync(path.join(baseDir, p)),
    );
    const blob = Buffer.concat(buffers);
    let offset = 0;
    for (const spec of group.weights as WeightSpec[]) {
      const count = spec.shape.reduce((a, b) => a * b, 1);
      if (spec.dtype !== 'float32') {
        throw new ExportError(`weight ${spec.name}: unsupported dtype ${spec.dtype}`);
      }
      const bytes = count * 4;
      const values = new Float32Array(
        blob.buffer.slice(blob.byteOffset + offset, blob.byteOffset + offset + bytes),
      );
      table.set(spec.name, { shape: spec.shape, values });
      offset += bytes;
    }
  }
  return table;
}

function lookupWeight(
  table: Map<string, NamedTensor>,
  layerName: string,
  param: 'kernel' | 'bias',
): NamedTensor | undefined {
  const direct = table.get(`${layerName}/${param}`);
  if (direct) return direct;
  // converter output sometimes prefixes scope names; match on the suffix
  for (const [name, tensor] of table) {
    if (name === param || name.endsWith(`/${layerName}/${param}`)) return tensor;
  }
  return undefined;
}

function transposeKernel(kernel: NamedTensor): number[][] {
  const [inDim, outDim] = kernel.shape;
  const rows: number[][] = [];
  for (let o = 0; o < outDim; o++) {
    const row = new Array<number>(inDim);
    for (let i = 0; i < inDim; i++) {
      row[i] = kernel.values[i * outDim + o];
    }
    rows.push(row);
  }
  return rows;
}

export function convertArtifacts(modelJsonPath: string, modelName: string): {
  model: InterchangeModel;
  report: ExportReport;
} {
  const raw = JSON.parse(fs.readFileSync(modelJsonPath, 'utf8'));
  if (!raw.modelTopology || !raw.weightsManifest) {
    throw new ExportError(`${modelJsonPath}: missing modelTopology or weightsManifest`);
  }
  const table = readWeightTable(modelJsonPath, raw.weightsManifest);
  const layers: InterchangeLayer[] = [];
  const activations: string[] = [];
  const warnings: string[] = [];

  for (const layer of topologyLayers(raw.modelTopology)) {
    const layerName = layer.config.name ?? layer.class_name;
    if (layer.class_name === 'InputLayer') {
      continue; // structural only, no parameters
    }
    if (layer.class_name !== 'Dense') {
      throw new UnsupportedLayerError(
        `layer ${layerName}: ${layer.class_name} has no interchange form`,
      );
    }
    const activation = layer.config.activation ?? 'linear';
    if (!SUPPORTED_ACTIVATIONS.has(activation)) {
      throw new UnsupportedLayerError(
        `layer ${layerName}: activation ${activation} has no interchange form`,
      );
    }
    const kernel = lookupWeight(table, layerName, 'kernel');
    if (!kernel || kernel.shape.length !== 2) {
      throw new ExportError(`layer ${layerName}: kernel weights not found`);
    }
    const outDim = kernel.shape[1];
    const bias = lookupWeight(table, layerName, 'bias');
    if (bias && bias.shape[0] !== outDim) {
      throw new ExportError(
        `layer ${layerName}: bias length ${bias.shape[0]} != units ${outDim}`,
      );
    }
    if (!bias) {
      warnings.push(`layer ${layerName}: no bias tensor, exported as zeros`);
    }
    layers.push({
      weights: transposeKernel(kernel),
      bias: bias ? Array.from(bias.values) : new Array<number>(outDim).fill(0),
      activation,
    });
    activations.push(activation);
  }

  if (layers.length === 0) {
    throw new ExportError('model has no Dense layers to export');
  }
  for (let k = 1; k < layers.length; k++) {
    const prevOut = layers[k - 1].weights.length;
    const currIn = layers[k].weights[0].length;
    if (prevOut !== currIn) {
      throw new ExportError(
        `layer ${k}: in_dim ${currIn} does not chain from previous out_dim ${prevOut}`,
      );
    }
  }

  const model: InterchangeModel = {
    name: modelName,
    input_dim: layers[0].weights[0].length,
    layers,
  };
  return {
    model,
    report: { layerCount: layers.length, activations, warnings },
  };
}

export function exportModel(inputPath: string, outPath: string): ExportReport {
  const modelJsonPath = resolveModelJsonPath(inputPath);
  const modelName = path.basename(outPath).replace(/\.json$/, '');
  const { model, report } = convertArtifacts(modelJsonPath, modelName);
  fs.writeFileSync(outPath, JSON.stringify(model, null, 2) + '\n');
  return report;
}
