/* tslint:disable */
/* eslint-disable */

/**
 * A seeded synthetic matrix held on the Rust side.
 */
export class Instance {
    free(): void;
    [Symbol.dispose](): void;
    cols(): number;
    errorCurve(k: number): Float64Array;
    constructor(rows: number, cols: number, spectrum: string, seed: number);
    ratioHistogram(k: number, epsilon: number, projections: number, bins: number, seed: number): Float64Array;
    rows(): number;
    scorePairs(k: number): Float64Array;
    selection(k: number, epsilon: number): Uint32Array;
}

/**
 * 1 − αε, the left edge of the histogram.
 */
export function ratioLowerBound(epsilon: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_instance_free: (a: number, b: number) => void;
    readonly instance_cols: (a: number) => number;
    readonly instance_errorCurve: (a: number, b: number) => [number, number, number, number];
    readonly instance_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly instance_ratioHistogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly instance_rows: (a: number) => number;
    readonly instance_scorePairs: (a: number, b: number) => [number, number, number, number];
    readonly instance_selection: (a: number, b: number, c: number) => [number, number, number, number];
    readonly ratioLowerBound: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
